#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "polyspec/error.hpp"
#include "polyspec/polymean.hpp"

using namespace polyspec;

namespace {

const double pi = oracle::pi;

// T^{-1} sum_t prod_j x_{(t + h_j) mod T}
double circular_moment(const std::vector<double>& x, std::vector<long long> h) {
    const long long T = static_cast<long long>(x.size());
    double acc = 0.0;
    for (long long t = 0; t < T; ++t) {
        double p = 1.0;
        for (long long hj : h) p *= x[((t + hj) % T + T) % T];
        acc += p;
    }
    return acc / static_cast<double>(T);
}

}  // namespace

TEST_CASE("sub-manifold mask") {
    const long long a[2] = {1, 2}, b[2] = {1, 7}, c[2] = {0, 3};
    CHECK(submanifold_mask(a, 8));
    CHECK_FALSE(submanifold_mask(b, 8));
    CHECK_FALSE(submanifold_mask(c, 8));
    const long long d[3] = {1, 2, -3}, e[3] = {1, 2, 4};
    CHECK_FALSE(submanifold_mask(d, 8));
    CHECK(submanifold_mask(e, 9));
    const long long f[5] = {1, 1, 1, 1, 1};
    CHECK_THROWS_AS(submanifold_mask(f, 100), UnsupportedOrderError);
}

TEST_CASE("k-th order periodogram") {
    auto x = oracle::random_series(8, 1);
    auto d = dft(TimeSeries(x));
    for (long long l = -3; l <= 4; ++l) {
        const long long one[1] = {l};
        cplx p = kth_periodogram(d, one);
        CHECK(std::abs(p.imag()) < 1e-14);
        CHECK(p.real() >= 0.0);
        CHECK(p.real() == doctest::Approx(std::norm(oracle::dft_at(x, l)) / 8));
    }
    const long long tup[2] = {1, 2};
    cplx direct = oracle::dft_at(x, 1) * oracle::dft_at(x, 2) * oracle::dft_at(x, -3) / 8.0;
    CHECK(std::abs(kth_periodogram(d, tup) - direct) < 1e-10);

    auto ones = dft(TimeSeries({1, 1, 1, 1}));
    const long long nz[2] = {1, 2};
    CHECK(std::abs(kth_periodogram(ones, nz)) < 1e-14);
}

TEST_CASE("zero weight gives zero") {
    auto x = TimeSeries(oracle::random_series(20, 2));
    CHECK(estimate_mean(x, zero_weight(2)).value == cplx(0, 0));
    CHECK(estimate_mean(x, constant_weight(1, 0.0)).value == cplx(0, 0));
}

TEST_CASE("lag weight of order 1 reproduces the circular autocovariance") {
    for (std::size_t T : {17u, 64u}) {
        auto raw = oracle::random_series(T, T);
        auto x = oracle::centered(raw);
        for (long long h = -5; h <= 5; ++h) {
            auto est = estimate_mean(TimeSeries(raw), lag_weight(1, {h}));
            CHECK(std::abs(est.value.real() - circular_moment(x, {0, h})) < 1e-10);
            CHECK(std::abs(est.value.imag()) < 1e-12);
            // the circular sum is the ordinary one plus the wrapped products
            const long long a = std::abs(h);
            double wrap = 0.0;
            for (long long t = T - a; t < (long long)T; ++t) wrap += x[t] * x[t + a - T];
            auto xs = center(TimeSeries(raw));
            CHECK(std::abs(est.value.real() - (sample_autocovariance(xs, h) + wrap / T)) < 1e-10);
        }
    }
}

TEST_CASE("order-2 lag weight equals the time-domain expansion") {
    const std::size_t T = 32;
    auto x = oracle::random_series(T, 77);
    for (auto& v : x) v += 0.3;  // keep a nonzero mean
    double xbar = 0.0;
    for (double v : x) xbar += v;
    xbar /= T;
    EstimateOptions raw;
    raw.auto_center = false;
    for (auto [h1, h2] : {std::pair{1LL, 2LL}, std::pair{0LL, 3LL}, std::pair{-2LL, 5LL}}) {
        // full triple sum, minus the three lines where one DFT collapses to
        // d(0) = T xbar, plus twice the all-zero point
        double expect = circular_moment(x, {0, h1, h2}) -
                        xbar * (circular_moment(x, {0, h2}) + circular_moment(x, {0, h1}) +
                                circular_moment(x, {0, h1 - h2})) +
                        2 * xbar * xbar * xbar;
        auto est = estimate_mean(TimeSeries(x), lag_weight(2, {h1, h2}), raw);
        CHECK(std::abs(est.value.real() - expect) < 1e-10);
        CHECK(std::abs(est.value.imag()) < 1e-10);

        // centered: only the circular triple product survives
        auto c = oracle::centered(x);
        auto est_c = estimate_mean(TimeSeries(x), lag_weight(2, {h1, h2}));
        CHECK(std::abs(est_c.value.real() - circular_moment(c, {0, h1, h2})) < 1e-10);
    }
}

TEST_CASE("order-2 lag estimate tracks the sample third cumulant at rate 1/T") {
    // |difference| * T stays below a frozen constant
    const double C = 6.0;
    for (std::size_t T : {64u, 128u, 256u}) {
        auto x = TimeSeries(oracle::random_series(T, 1000 + T));
        auto xc = center(x);
        for (auto [h1, h2] : {std::pair{1LL, 2LL}, std::pair{0LL, 1LL}, std::pair{2LL, -1LL}}) {
            double diff = estimate_mean(x, lag_weight(2, {h1, h2})).value.real() -
                          sample_autocumulant3(xc, h1, h2);
            CHECK(std::abs(diff) * T <= C);
        }
    }
}

TEST_CASE("estimates for symmetric weights are real") {
    std::vector<WeightFunction> ws{bartlett_weight(), cosine_product_weight(), cone_weight(),
                                   annulus_indicator(0.1, 0.5), band_indicator(-0.2, 0.2, -0.5, 0.5),
                                   lag_weight(2, {2, -1})};
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto x = TimeSeries(oracle::random_series(31 + seed, seed));
        for (const auto& e : estimate_means(x, ws)) {
            CAPTURE(e.weight_label);
            CHECK(std::abs(e.value.imag()) <= 1e-8 * (1 + std::abs(e.value)));
        }
    }
}

TEST_CASE("parallel summation is bit-identical") {
    auto x = TimeSeries(oracle::random_series(45, 5));
    EstimateOptions one, many;
    one.threads = 1;
    many.threads = 4;
    std::vector<WeightFunction> ws{cone_weight(), wcob_numerator_weight(1)};
    auto a = estimate_means(x, ws, one);
    auto b = estimate_means(x, ws, many);
    for (std::size_t i = 0; i < ws.size(); ++i) CHECK(a[i].value == b[i].value);
}

TEST_CASE("cached grid estimator agrees with direct estimation") {
    std::vector<WeightFunction> ws{bartlett_weight(), cosine_product_weight(), lag_weight(2, {1, 1})};
    GridEstimator ge(40, 2, ws);
    CHECK(ge.size() == 3);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto x = TimeSeries(oracle::random_series(40, 50 + seed));
        auto fast = ge.estimate(x);
        auto slow = estimate_means(x, ws);
        for (std::size_t i = 0; i < ws.size(); ++i)
            CHECK(std::abs(fast[i] - slow[i].value) <= 1e-12 * (1 + std::abs(slow[i].value)));
    }
    CHECK_THROWS_AS(ge.estimate(TimeSeries(oracle::random_series(41, 1))), InputError);
}

TEST_CASE("estimator errors") {
    auto x = TimeSeries(oracle::random_series(12, 3));
    WeightFunction g5(5, [](std::span<const double>) { return cplx(1, 0); }, true, "five");
    CHECK_THROWS_AS(estimate_mean(x, g5), UnsupportedOrderError);
    WeightFunction bad(1, [](std::span<const double> l) { return cplx(1.0 / l[0], 0); }, false, "pole");
    // l = 0 is masked, so 1/l stays finite on the grid
    CHECK_NOTHROW(estimate_mean(x, bad));
    WeightFunction nan(1, [](std::span<const double>) { return cplx(std::nan(""), 0); }, false, "nan");
    CHECK_THROWS_AS(estimate_mean(x, nan), ComputationError);
    CHECK_THROWS_AS(estimate_means(x, {lag_weight(1, {0}), lag_weight(2, {0, 0})}), InputError);
}

TEST_CASE("sample autocumulants") {
    std::vector<double> alt{1, -1, 1, -1, 1, -1, 1, -1};
    CHECK(sample_autocumulant3(TimeSeries(alt), 0, 0) == 0.0);
    CHECK(sample_autocumulant3(TimeSeries(std::vector<double>(8, 0.0)), 1, 2) == 0.0);
    CHECK(sample_autocumulant4(TimeSeries(std::vector<double>(8, 0.0)), 1, 2, 3) == 0.0);

    auto x = oracle::random_series(16, 8);
    auto xs = TimeSeries(x);
    auto triple = [&](long long h1, long long h2) {
        double acc = 0;
        for (long long t = 0; t < 16; ++t) {
            long long a = t + h1, b = t + h2;
            if (a < 0 || a >= 16 || b < 0 || b >= 16) continue;
            acc += x[t] * x[a] * x[b];
        }
        return acc / 16;
    };
    CHECK(sample_autocumulant3(xs, 1, 2) == doctest::Approx(triple(1, 2)));
    CHECK(sample_autocumulant3(xs, -3, 2) == doctest::Approx(triple(-3, 2)));

    auto gam = [&](long long h) {
        double acc = 0;
        for (long long t = 0; t < 16; ++t)
            if (t + h >= 0 && t + h < 16) acc += x[t] * x[t + h];
        return acc / 16;
    };
    double eta = 0;
    for (long long t = 0; t < 16; ++t)
        if (t + 3 < 16) eta += x[t] * x[t + 1] * x[t + 2] * x[t + 3];
    eta /= 16;
    double expect = eta - gam(1) * gam(-1) - gam(2) * gam(2) - gam(3) * gam(1);
    CHECK(sample_autocumulant4(xs, 1, 2, 3) == doctest::Approx(expect));

    CHECK_THROWS_AS(sample_autocumulant3(xs, 16, 0), InputError);
    CHECK_THROWS_AS(sample_autocovariance(xs, -16), InputError);
}

TEST_CASE("fourth cumulant of Gaussian noise is small") {
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> n01;
    int inside = 0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(2000);
        for (auto& v : x) v = n01(gen);
        if (std::abs(sample_autocumulant4(TimeSeries(x), 0, 0, 0)) < 0.5) ++inside;
    }
    CHECK(inside >= 19);
}
