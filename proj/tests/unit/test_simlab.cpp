#include <cmath>
#include <numeric>

#include "doctest.h"
#include "polyspec/asymvar.hpp"
#include "polyspec/error.hpp"
#include "polyspec/polymean.hpp"
#include "polyspec/simlab.hpp"

using namespace polyspec;

namespace {

double mean_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double acf(std::span<const double> x, std::size_t h) {
    const double m = mean_of(x);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        den += (x[t] - m) * (x[t] - m);
        if (t + h < x.size()) num += (x[t] - m) * (x[t + h] - m);
    }
    return num / den;
}

}  // namespace

TEST_CASE("substreams are reproducible and distinct") {
    Rng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    const double va = a.uniform();
    CHECK(va == b.uniform());
    CHECK(va != c.uniform());
    CHECK(va != d.uniform());
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("innovation samplers have the documented moments") {
    Rng rng(1, 0);
    const int n = 200000;
    for (auto innov : {Innovation::Gauss01, Innovation::Exp1m1, Innovation::ChiSq4m4}) {
        double s1 = 0, s2 = 0, s3 = 0;
        for (int i = 0; i < n; ++i) {
            const double e = rng.innovation(innov);
            s1 += e;
            s2 += e * e;
            s3 += e * e * e;
        }
        const double k2 = innovation_cumulant(innov, 2), k3 = innovation_cumulant(innov, 3);
        CHECK(std::abs(s1 / n) < 5 * std::sqrt(k2 / n));
        CHECK(s2 / n == doctest::Approx(k2).epsilon(0.03));
        CHECK(std::abs(s3 / n - k3) < 0.06 * (1 + std::abs(k3)) + 0.02 * k2 * std::sqrt(k2));
    }
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("quadratic MA at theta = 0 is the Gaussian MA(1)") {
    Rng a(9, 1), b(9, 1);
    auto q = simulate(parse_model("quadma:theta=0"), 64, a);
    auto m = simulate(parse_model("ma1:theta=0.4"), 64, b);
    for (std::size_t t = 0; t < 64; ++t) CHECK(q[t] == doctest::Approx(m[t]).epsilon(1e-14));
}

TEST_CASE("AR(2) with Exp innovations: mean and lag-one autocorrelation") {
    auto spec = parse_model("ar2-exp");
    Rng rng(2, 0);
    auto x = simulate(spec, 4000, rng);
    // rho(1) from the spectral density by quadrature
    const auto& m = *spec.linear;
    const int N = 4096;
    double g0 = 0.0, g1 = 0.0;
    for (int n = 0; n < N; ++n) {
        const double l = 2 * M_PI * (n + 0.5) / N - M_PI;
        const double f = std::norm(transfer(m, l));
        g0 += f;
        g1 += f * std::cos(l);
    }
    const double rho1 = g1 / g0;
    CHECK(rho1 == doctest::Approx(1.0 / 1.9).epsilon(1e-6));
    CHECK(std::abs(mean_of(x.values())) < 0.2);
    // Bartlett standard error of rho(1) for a long-memory-free AR(2) is below 0.03 at T = 4000
    CHECK(std::abs(acf(x.values(), 1) - rho1) < 0.05);
}

TEST_CASE("Hermite path: sample variance near the model variance") {
    auto spec = parse_model("hermite");
    const double gamma0 = spec.polynomial->cumulant(std::array<long long, 1>{0});
    double acc = 0.0;
    const int paths = 20;
    for (int r = 0; r < paths; ++r) {
        Rng rng(77, r);
        auto x = simulate(spec, 4000, rng);
        const double mu = mean_of(x.values());
        double v = 0.0;
        for (double e : x.values()) v += (e - mu) * (e - mu);
        acc += v / x.size();
    }
    CHECK(acc / paths == doctest::Approx(gamma0).epsilon(0.1));
}

TEST_CASE("averaged periodogram follows the spectral density") {
    auto spec = parse_model("arma21-exp");
    const std::size_t T = 256;
    const int reps = 200;
    std::vector<double> avg(T, 0.0);
    for (int r = 0; r < reps; ++r) {
        Rng rng(4, r);
        auto d = dft(center(simulate(spec, T, rng)));
        for (std::size_t l = 1; l < T / 2; ++l) avg[l] += std::norm(d.at(static_cast<long long>(l))) / T / reps;
    }
    // finite-T expectation: Fejer-weighted autocovariances from the psi weights
    const auto psi = spec.linear->psi_weights(2000);
    std::vector<double> gamma(T, 0.0);
    for (std::size_t h = 0; h < T; ++h)
        for (std::size_t j = 0; j + h < psi.size(); ++j) gamma[h] += psi[j] * psi[j + h];
    int within = 0, total = 0;
    for (std::size_t l = 8; l < T / 2; l += 8) {
        const double lam = 2 * M_PI * l / T;
        double expect = gamma[0];
        for (std::size_t h = 1; h < T; ++h) expect += 2.0 * (1.0 - double(h) / T) * gamma[h] * std::cos(h * lam);
        ++total;
        within += std::abs(avg[l] / expect - 1.0) < 4.0 / std::sqrt(reps);
    }
    CHECK(within >= total - 1);
}

TEST_CASE("simulate argument checks") {
    Rng rng(1, 0);
    CHECK_THROWS_AS(simulate(parse_model("ar2-exp"), 100, rng, 100), InputError);
    CHECK_NOTHROW(simulate(parse_model("ma1:theta=0.3"), 100, rng, 0));
    CHECK_THROWS_AS(simulate(SimSpec{"nope", 100, 1, 1, 500}), InputError);
    auto a = simulate(SimSpec{"ar2-chisq", 50, 3, 5, 500}, 2);
    auto b = simulate(SimSpec{"ar2-chisq", 50, 3, 5, 500}, 2);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST_CASE("cosine-product mean is consistent for the AR(2) model") {
    auto spec = parse_model("ar2-exp");
    const auto g = cosine_product_weight();
    const double target = polyspectral_mean(g, *spec.linear, 256).real();
    GridEstimator est(400, 2, {g});
    const int reps = 300;
    double s = 0, s2 = 0;
    for (int r = 0; r < reps; ++r) {
        Rng rng(31, r);
        const double v = est.estimate(simulate(spec, 400, rng)).front().real();
        s += v;
        s2 += v * v;
    }
    const double mean = s / reps;
    const double se = std::sqrt((s2 / reps - mean * mean) / reps);
    CHECK(std::abs(mean - target) < 3 * se + 0.02 * std::abs(target));
}

TEST_CASE("MSE experiment") {
    MseConfig cfg;
    cfg.models = {"ma1:theta=0.5,innov=exp"};
    cfg.weights = {lag_weight(2, {0, 0}), zero_weight(2)};
    cfg.T = 64;
    cfg.reps = 60;
    cfg.outer_reps = 4;
    cfg.grid_n = 16;
    cfg.threads = 1;
    auto a = mse_experiment(cfg);
    REQUIRE(a.entries.size() == 2);
    CHECK(a.entries[0].V == doctest::Approx(304.875));
    CHECK(a.entries[0].mse >= 0.0);
    CHECK(a.entries[0].scaled_mse == doctest::Approx(a.entries[0].mse / (304.875 * 304.875)));
    CHECK(a.entries[1].V == 0.0);
    CHECK(a.entries[1].mse == 0.0);
    cfg.threads = 3;
    auto b = mse_experiment(cfg);
    CHECK(b.entries[0].mse == a.entries[0].mse);
    CHECK(b.entries[0].mean_vhat == a.entries[0].mean_vhat);
}

TEST_CASE("power curve shape on a small design") {
    PowerConfig cfg;
    cfg.thetas = {0.0, 10.0};
    cfg.reps = 30;
    cfg.M = 3;
    cfg.threads = 1;
    auto p = power_curve(cfg);
    REQUIRE(p.size() == 2);
    CHECK(p[0].rate <= 0.2);
    CHECK(p[1].rate > p[0].rate);
    CHECK(p[1].reps == 30);
}
