#include <cmath>
#include <map>

#include "doctest.h"
#include "polyspec/asymvar.hpp"
#include "polyspec/error.hpp"
#include "polyspec/partitions.hpp"

using namespace polyspec;

namespace {

// Polynomials in the innovations of a finite-memory process, keyed by the
// sorted (time, power) list of each monomial.
using Mono = std::vector<std::pair<int, int>>;
using Poly = std::map<Mono, double>;

Poly mul(const Poly& p, const Poly& q) {
    Poly r;
    for (const auto& [a, ca] : p)
        for (const auto& [b, cb] : q) {
            std::map<int, int> pw(a.begin(), a.end());
            for (auto [t, e] : b) pw[t] += e;
            r[Mono(pw.begin(), pw.end())] += ca * cb;
        }
    return r;
}

Poly axpy(Poly p, const Poly& q, double c) {
    for (const auto& [m, v] : q) p[m] += c * v;
    return p;
}

// Raw moments of Exp(1) - 1 are the subfactorials.
double exp_moment(int n) {
    double d = 1.0;
    for (int i = 1; i <= n; ++i) d = i * d + (i % 2 ? -1.0 : 1.0);
    return d;
}

double expect(const Poly& p) {
    double s = 0.0;
    for (const auto& [m, c] : p) {
        double v = c;
        for (auto [t, e] : m) v *= exp_moment(e);
        s += v;
    }
    return s;
}

// X_t = e_t + theta e_{t-1}
Poly ma1(int t, double theta) { return {{{{t, 1}}, 1.0}, {{{t - 1, 1}}, theta}}; }

// sum_u Cov(phi(X_0..), phi(X_u..)) for a finite-memory statistic phi
template <typename Phi>
double long_run_variance(Phi phi, int reach) {
    const double m = expect(phi(0));
    double v = 0.0;
    for (int u = -reach; u <= reach; ++u) v += expect(mul(phi(0), phi(u))) - m * m;
    return v;
}

VarianceRequest request(int k, std::vector<WeightFunction> w, SpectraSource src, int N) {
    VarianceRequest r;
    r.k = k;
    r.weights = std::move(w);
    r.source = std::move(src);
    r.grid_n = N;
    r.threads = 1;
    return r;
}

}  // namespace

TEST_CASE("subfactorial moments") {
    CHECK(exp_moment(2) == 1.0);
    CHECK(exp_moment(3) == 2.0);
    CHECK(exp_moment(4) == 9.0);
    CHECK(exp_moment(5) == 44.0);
}

TEST_CASE("k=1 white noise: V of the lag-0 weight is 2") {
    LinearModel white({}, {}, Innovation::Gauss01);
    const double v = variance(request(1, {lag_weight(1, {0})}, white, 128), 0, 0);
    CHECK(v >= 1.96);
    CHECK(v <= 2.04);
    CHECK(variance(request(1, {lag_weight(1, {3})}, white, 32), 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("k=1 matches the Bartlett formula with the fourth-cumulant term") {
    // MA(1), theta = 0.5, Exp(1)-1: gamma(0) = 1.25, gamma(1) = 0.5, kappa_4 = 6
    LinearModel m({}, {0.5}, Innovation::Exp1m1);
    const double g0 = 1.25, g1 = 0.5, k4 = 6.0;
    auto gam = [&](int u) { return u == 0 ? g0 : (std::abs(u) == 1 ? g1 : 0.0); };
    auto bartlett = [&](int h) {
        double s = k4 * gam(h) * gam(h);
        for (int u = -4; u <= 4; ++u) s += gam(u) * gam(u) + gam(u + h) * gam(u - h);
        return s;
    };
    auto c = cov_matrix(request(1, {lag_weight(1, {0}), lag_weight(1, {1})}, m, 32));
    CHECK(c(0, 0) == doctest::Approx(bartlett(0)).epsilon(1e-10));
    CHECK(c(1, 1) == doctest::Approx(bartlett(1)).epsilon(1e-10));
    // cross term: sum_u gamma(u) gamma(u+1) + gamma(u+1) gamma(u) + kappa_4 gamma(0) gamma(1)
    double cross = k4 * g0 * g1;
    for (int u = -4; u <= 4; ++u) cross += 2.0 * gam(u) * gam(u + 1);
    CHECK(c(0, 1) == doctest::Approx(cross).epsilon(1e-10));
}

TEST_CASE("k=2 matches the long-run variance of the centered third moment") {
    const double theta = 0.5;
    LinearModel m({}, {theta}, Innovation::Exp1m1);
    const double g0 = expect(mul(ma1(0, theta), ma1(0, theta)));
    auto phi = [&](int t) {
        const Poly x = ma1(t, theta);
        return axpy(mul(mul(x, x), x), x, -3.0 * g0);
    };
    const double oracle = long_run_variance(phi, 3);
    CHECK(oracle == doctest::Approx(304.875));
    CHECK(variance(request(2, {lag_weight(2, {0, 0})}, m, 16), 0, 0) == doctest::Approx(oracle).epsilon(1e-9));

    // lag (1, 0): X_t^2 X_{t+1} centered, influence X_t^2 X_{t+1} - 2 g1 X_t - g0 X_{t+1}
    const double g1 = expect(mul(ma1(0, theta), ma1(1, theta)));
    auto phi10 = [&](int t) {
        const Poly a = ma1(t, theta), b = ma1(t + 1, theta);
        Poly p = mul(mul(a, a), b);
        p = axpy(p, a, -2.0 * g1);
        return axpy(p, b, -g0);
    };
    CHECK(variance(request(2, {lag_weight(2, {1, 0})}, m, 16), 0, 0) ==
          doctest::Approx(long_run_variance(phi10, 4)).epsilon(1e-9));
}

TEST_CASE("tabulated and closed-form spectra give the same V") {
    for (int k = 1; k <= 2; ++k) {
        LinearModel lin({}, {-0.3}, Innovation::ChiSq4m4);
        auto table = std::make_shared<const CumulantSpectra>(ma_process({-0.3}, Innovation::ChiSq4m4), 2 * k + 2);
        std::vector<WeightFunction> w;
        if (k == 1) {
            w = {lag_weight(1, {0}), lag_weight(1, {2})};
        } else {
            w = {cosine_product_weight(), lag_weight(2, {1, 1}), cone_weight()};
        }
        const auto a = VarianceEngine(request(k, w, lin, 16)).raw_matrix();
        const auto b = VarianceEngine(request(k, w, table, 16)).raw_matrix();
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(std::abs(a[i] - b[i]) <= 1e-8 * (1.0 + std::abs(a[i])));
    }
}

TEST_CASE("zero weight and duplicate weights") {
    LinearModel m({1.0, -0.9}, {}, Innovation::Exp1m1);
    auto c = cov_matrix(request(2, {zero_weight(2), cosine_product_weight(), cosine_product_weight()}, m, 16));
    CHECK(c(0, 0) == 0.0);
    CHECK(c(0, 1) == 0.0);
    CHECK(c(1, 2) == doctest::Approx(c(1, 1)).epsilon(1e-12));
    CHECK(c.labels[1] == "cosprod");
    CHECK(variance(request(1, {zero_weight(1)}, m, 16), 0, 0) == 0.0);
}

TEST_CASE("d=1 matrix equals variance") {
    LinearModel m({0.5}, {}, Innovation::Exp1m1);
    auto req = request(2, {bartlett_weight()}, m, 16);
    CHECK(cov_matrix(req)(0, 0) == doctest::Approx(variance(req, 0, 0)).epsilon(1e-12));
}

TEST_CASE("covariance matrix is symmetric and positive semi-definite") {
    LinearModel m({1.0, -0.9}, {0.8}, Innovation::ChiSq4m4);
    VarianceEngine eng(request(2, {cosine_product_weight(), bartlett_weight(), cone_weight(), lag_weight(2, {1, 2})}, m, 16));
    const auto raw = eng.raw_matrix();
    const std::size_t d = eng.size();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t n = 0; n < d; ++n)
            CHECK(std::abs(raw[i * d + n] - std::conj(raw[n * d + i])) <= 1e-9 * (1.0 + std::abs(raw[i * d + n])));
    const auto c = eng.cov_matrix();
    for (std::size_t i = 0; i < d; ++i) {
        CHECK(c(i, i) > 0.0);
        for (std::size_t n = 0; n < d; ++n) {
            CHECK(c(i, n) == c(n, i));
            CHECK(c(i, n) * c(i, n) <= c(i, i) * c(n, n) * (1 + 1e-9));
        }
    }
}

TEST_CASE("grid convergence for smooth integrands") {
    LinearModel m({0.5}, {0.3}, Innovation::Exp1m1);
    std::vector<WeightFunction> w = {cosine_product_weight(), lag_weight(2, {1, 0})};
    auto a = cov_matrix(request(2, w, m, 32));
    auto b = cov_matrix(request(2, w, m, 64));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(a(i, i) / b(i, i) - 1.0) < 0.01);
}

TEST_CASE("lintest weights: analytic and gridded covariances agree") {
    LinearModel m({0.6}, {0.2}, Innovation::Exp1m1);
    std::vector<WeightFunction> w = {lintest_weight(0, 1, m), lintest_weight(1, 1, m), lintest_weight(2, 1, m)};
    // same weights stripped of their filter tag go through the generic grid
    std::vector<WeightFunction> plain;
    for (const auto& g : w)
        plain.emplace_back(2, [g](std::span<const double> x) { return g(x); }, true, g.label());
    VarianceEngine exact(request(2, w, m, 32));
    VarianceEngine grid(request(2, plain, m, 32));
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t n = 0; n < w.size(); ++n)
            CHECK(exact.covariance(i, n).real() == doctest::Approx(grid.covariance(i, n).real()).epsilon(1e-8).scale(1.0));
    const double base = std::pow(2 * M_PI, 4);
    // (0,1) and (1,0) give the same estimate, so they are perfectly correlated
    CHECK(lintest_covariance(m, 0, 1, 1, 0) == doctest::Approx(lintest_covariance(m, 0, 1, 0, 1)));
    CHECK(lintest_covariance(m, 2, 1, 2, 1) / base == doctest::Approx(m.cumulant(2) * m.cumulant(2) * m.cumulant(2)));
}

TEST_CASE("ordered schemes double the multi-block terms") {
    LinearModel m({}, {}, Innovation::Gauss01);
    auto req = request(1, {lag_weight(1, {0})}, m, 32);
    req.ordered_schemes = true;
    CHECK(variance(req, 0, 0) == doctest::Approx(4.0));
}

TEST_CASE("polyspectral mean by quadrature") {
    LinearModel m({}, {0.5}, Innovation::Exp1m1);
    // lag weights recover the autocumulants
    CHECK(polyspectral_mean(lag_weight(1, {1}), m, 32).real() == doctest::Approx(0.5));
    CHECK(polyspectral_mean(lag_weight(2, {0, 0}), m, 32).real() == doctest::Approx(2.0 * (1 + 0.125)));
    CHECK(polyspectral_mean(lag_weight(2, {1, 0}), m, 32).real() == doctest::Approx(2.0 * 0.5));
    auto table = std::make_shared<const CumulantSpectra>(ma_process({0.5}, Innovation::Exp1m1), 4);
    CHECK(polyspectral_mean(cosine_product_weight(), table, 32).real() ==
          doctest::Approx(polyspectral_mean(cosine_product_weight(), m, 32).real()));
}

TEST_CASE("Monte Carlo oracle") {
    auto white = parse_model("white");
    auto c = mc_cov_oracle(white, {lag_weight(1, {0})}, 256, 4000, 11, 500, 1);
    CHECK(c(0, 0) == doctest::Approx(2.0).epsilon(0.075));
    auto z = mc_cov_oracle(white, {zero_weight(1)}, 64, 50, 1);
    CHECK(z(0, 0) == 0.0);
    auto again = mc_cov_oracle(white, {lag_weight(1, {0})}, 256, 200, 11, 500, 1);
    auto twice = mc_cov_oracle(white, {lag_weight(1, {0})}, 256, 200, 11, 500, 2);
    CHECK(again(0, 0) == twice(0, 0));
}

TEST_CASE("oracle agreement for k=2 under a linear model") {
    auto spec = parse_model("arma:ar=0.5,ma=0.3,innov=exp");
    std::vector<WeightFunction> w = {lag_weight(2, {0, 0}), cosine_product_weight()};
    auto v = cov_matrix(request(2, w, *spec.linear, 64));
    auto mc = mc_cov_oracle(spec, w, 400, 2000, 5);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(mc(i, i) / v(i, i) - 1.0) < 0.25);
}

TEST_CASE("argument checks") {
    LinearModel m({}, {}, Innovation::Gauss01);
    CHECK_THROWS_AS(VarianceEngine(request(3, {constant_weight(3, 1.0)}, m, 16)), UnsupportedOrderError);
    CHECK_THROWS_AS(VarianceEngine(request(2, {cosine_product_weight()}, m, 15)), InputError);
    CHECK_THROWS_AS(VarianceEngine(request(2, {lag_weight(1, {0})}, m, 16)), InputError);
    CHECK_THROWS_AS(VarianceEngine(request(2, {}, m, 16)), InputError);
    auto odd = wcob_numerator_weight(1);
    VarianceEngine eng(request(2, {odd}, m, 16));
    CHECK_NOTHROW(eng.variance(0, 0));
}
