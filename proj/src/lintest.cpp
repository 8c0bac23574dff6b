#include "polyspec/lintest.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>

#include "polyspec/error.hpp"
#include "polyspec/parallel.hpp"
#include "polyspec/simlab.hpp"
#include "polyspec/weights.hpp"

namespace polyspec {

PvalueMethod parse_pvalue_method(std::string_view name) {
    if (name == "montecarlo" || name == "mc") return PvalueMethod::MonteCarlo;
    if (name == "imhof") return PvalueMethod::Imhof;
    throw InputError("unknown p-value method '" + std::string(name) + "'");
}

std::string to_string(PvalueMethod method) {
    return method == PvalueMethod::Imhof ? "imhof" : "montecarlo";
}

std::vector<std::pair<int, int>> lintest_index_set(int M) {
    if (M < 1) throw InputError("M must be >= 1");
    std::vector<std::pair<int, int>> out;
    for (int j = 0; j <= M; ++j)
        for (int k = 0; k <= M; ++k)
            if (j || k) out.emplace_back(j, k);
    return out;
}

std::array<double, 5> residual_cumulants(const TimeSeries& series, const LinearModel& model) {
    const TimeSeries x = center(series);
    auto v = x.values();
    const std::size_t T = v.size();
    if (T < 8) throw InputError("residual cumulants need at least 8 observations");
    const auto& ar = model.ar();
    const auto& ma = model.ma();
    std::vector<double> e(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double s = v[t];
        for (std::size_t i = 0; i < ar.size() && i < t; ++i) s -= ar[i] * v[t - 1 - i];
        for (std::size_t i = 0; i < ma.size() && i < t; ++i) s -= ma[i] * e[t - 1 - i];
        e[t] = s;
    }
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(T);
    std::array<double, 7> mu{};
    for (double r : e) {
        const double c = r - mean;
        double p = c * c;
        for (int n = 2; n <= 6; ++n) {
            mu[n] += p;
            p *= c;
        }
    }
    for (auto& m : mu) m /= static_cast<double>(T);
    if (!(mu[2] > 0.0)) throw ComputationError("residuals have zero variance");
    return {mu[2], mu[3], mu[4] - 3 * mu[2] * mu[2], mu[5] - 10 * mu[3] * mu[2],
            mu[6] - 15 * mu[4] * mu[2] - 10 * mu[3] * mu[3] + 30 * mu[2] * mu[2] * mu[2]};
}

std::vector<cplx> lintest_estimates(const TimeSeries& series, const LinearModel& model, int M, int threads) {
    const auto index = lintest_index_set(M);
    const TimeSeries x = center(series);
    const long long T = static_cast<long long>(x.size());
    const DftTable d = dft(x);
    const long long lo = grid_low(T), hi = grid_high(T);
    const std::size_t width = static_cast<std::size_t>(T);
    const std::size_t K = static_cast<std::size_t>(M) + 1;

    // e^{i k lambda_l} for k = 0..M over the canonical grid
    std::vector<cplx> tw(width * K);
    for (long long l = lo; l <= hi; ++l)
        for (std::size_t k = 0; k < K; ++k)
            tw[(l - lo) * K + k] = std::polar(1.0, kTwoPi * static_cast<double>(l) * static_cast<double>(k) / T);

    std::vector<cplx> H(width * K);
    std::vector<int> singular(width, 0);
    parallel_chunks(width, threads, [&](std::size_t c) {
        const long long l1 = lo + static_cast<long long>(c);
        if (l1 % T == 0) return;
        const double a1 = kTwoPi * static_cast<double>(l1) / T;
        cplx* row = &H[c * K];
        for (long long l2 = lo; l2 <= hi; ++l2) {
            if (l2 % T == 0 || (l1 + l2) % T == 0) continue;
            const cplx psi = filter_triple(model, a1, kTwoPi * static_cast<double>(l2) / T);
            if (std::abs(psi) < 1e-8) {
                singular[c] = 1;
                return;
            }
            const cplx F = d.at(l1) * d.at(l2) * d.at(-(l1 + l2)) / psi;
            const cplx* w = &tw[(l2 - lo) * K];
            for (std::size_t k = 0; k < K; ++k) row[k] += F * w[k];
        }
    });
    for (int s : singular)
        if (s) throw SingularFilterError("lintest weight: |Psi| below 1e-8 on the Fourier grid");

    const double scale = kTwoPi * kTwoPi / (static_cast<double>(T) * T * T);
    std::vector<cplx> out;
    out.reserve(index.size());
    for (auto [j, k] : index) {
        cplx acc{0.0, 0.0};
        for (std::size_t c = 0; c < width; ++c) acc += H[c * K + k] * tw[c * K + j];
        out.push_back(acc * scale);
    }
    return out;
}

CovMatrix null_covariance(const LinearModel& model, int M) {
    const auto index = lintest_index_set(M);
    const std::size_t d = index.size();
    CovMatrix cov;
    cov.dim = d;
    cov.entries.assign(d * d, 0.0);
    for (auto [j, k] : index) cov.labels.push_back("lintest:j=" + std::to_string(j) + ",k=" + std::to_string(k));
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            const double v = lintest_covariance(model, index[a].first, index[a].second, index[b].first, index[b].second);
            cov(a, b) = v;
            cov(b, a) = v;
        }
    return cov;
}

CovMatrix null_cov(const LinTestConfig& config) {
    const LinearModel model = config.cumulants ? config.model.with_cumulants(*config.cumulants) : config.model;
    CovMatrix cv = null_covariance(model, config.M);
    const std::size_t d = cv.dim;
    std::vector<double> sd(d);
    for (std::size_t a = 0; a < d; ++a) {
        if (!(cv(a, a) > 0.0)) throw ComputationError("null variance is not positive; check the innovation cumulants");
        sd[a] = std::sqrt(cv(a, a));
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) cv(a, b) = a == b ? 1.0 : cv(a, b) / (sd[a] * sd[b]);
    return cv;
}

std::vector<double> eigenvalues_sym(const CovMatrix& matrix) {
    const std::size_t d = matrix.dim;
    if (matrix.entries.size() != d * d) throw InputError("matrix storage does not match its dimension");
    Eigen::MatrixXd A(d, d);
    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            A(i, j) = matrix(i, j);
            scale = std::max(scale, std::abs(matrix(i, j)));
        }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(A(i, j) - A(j, i)) > 1e-9 * std::max(1.0, scale))
                throw InputError("eigenvalues_sym: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ComputationError("eigenvalue solver did not converge");
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + d);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

namespace {

double imhof_tail(double x, const std::vector<double>& nu) {
    const double n = static_cast<double>(nu.size());
    double log_root = 0.0;
    double sum = 0.0;
    for (double v : nu) {
        log_root += 0.5 * std::log(v);
        sum += v;
    }
    auto f = [&](double u) {
        if (u == 0.0) return 0.5 * (sum - x);
        double theta = -0.5 * x * u;
        double log_rho = 0.0;
        for (double v : nu) {
            theta += 0.5 * std::atan(v * u);
            log_rho += 0.25 * std::log1p(v * v * u * u);
        }
        return std::sin(theta) / (u * std::exp(log_rho));
    };
    using boost::math::quadrature::gauss_kronrod;
    const double tol = 1e-7;
    const double width = kTwoPi / x;
    const std::size_t window = 24;
    std::vector<double> partial;
    double total = 0.0;
    double previous = std::nan("");
    int settled = 0;
    for (std::size_t p = 0; p < 20000; ++p) {
        const double a = width * static_cast<double>(p);
        total += gauss_kronrod<double, 31>::integrate(f, a, a + width, 8, 1e-12);
        partial.push_back(total);
        const double U = a + width;
        const double tail = std::exp(std::log(2.0 / n) - 0.5 * n * std::log(U) - log_root);
        if (tail < tol) return 0.5 + total / kPi;
        if (partial.size() < 2 * window) continue;
        std::vector<double> avg(partial.end() - window, partial.end());
        while (avg.size() > 1) {
            for (std::size_t i = 0; i + 1 < avg.size(); ++i) avg[i] = 0.5 * (avg[i] + avg[i + 1]);
            avg.pop_back();
        }
        if (std::abs(avg[0] - previous) < tol) {
            if (++settled >= 3) return 0.5 + avg[0] / kPi;
        } else {
            settled = 0;
        }
        previous = avg[0];
    }
    return 0.5 + previous / kPi;
}

}  // namespace

double weighted_chisq_pvalue(double x, std::vector<double> nu, PvalueMethod method, std::size_t draws,
                             std::uint64_t seed) {
    if (!std::isfinite(x)) throw InputError("statistic must be finite");
    if (nu.empty()) throw InputError("no eigenvalues supplied");
    const double top = *std::max_element(nu.begin(), nu.end());
    if (!(top > 0.0)) throw ComputationError("degenerate weighted chi-square: all weights are zero");
    std::vector<double> kept;
    for (double v : nu) {
        if (!std::isfinite(v)) throw InputError("eigenvalues must be finite");
        if (v < -1e-8 * top) throw InputError("eigenvalues must be non-negative");
        if (v > 1e-12 * top) kept.push_back(v);
    }
    if (x <= 0.0) return 1.0;
    if (method == PvalueMethod::Imhof) return std::clamp(imhof_tail(x, kept), 0.0, 1.0);
    if (draws == 0) throw InputError("Monte Carlo p-value needs draws > 0");
    Rng rng(seed, 0);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < draws; ++r) {
        double s = 0.0;
        for (double v : kept) {
            const double z = rng.normal();
            s += v * z * z;
        }
        if (s > x) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(draws);
}

LinTestResult blt_statistic(const TimeSeries& series, const LinTestConfig& config) {
    if (series.size() < 32) throw InputError("linearity test needs at least 32 observations");
    LinTestConfig cfg = config;
    if (!cfg.cumulants) cfg.cumulants = residual_cumulants(series, cfg.model);
    const LinearModel h0 = cfg.model.with_cumulants(*cfg.cumulants);

    LinTestResult res;
    res.T = series.size();
    res.M = cfg.M;
    res.cumulants = *cfg.cumulants;
    const auto index = lintest_index_set(cfg.M);
    const auto est = lintest_estimates(series, h0, cfg.M, cfg.threads);
    const double T = static_cast<double>(series.size());
    for (std::size_t a = 0; a < index.size(); ++a) {
        const auto [j, k] = index[a];
        const double V = lintest_covariance(h0, j, k, j, k);
        if (!(V > 0.0)) throw ComputationError("null variance is not positive; check the innovation cumulants");
        const double c = T * std::norm(est[a]) / V;
        res.per_term.push_back({j, k, est[a], V, c});
        res.statistic += c;
    }

    res.eigenvalues = eigenvalues_sym(null_cov(cfg));
    const double top = res.eigenvalues.empty() ? 0.0 : res.eigenvalues.front();
    bool clipped = false;
    for (auto& v : res.eigenvalues) {
        if (v < -1e-8 * std::max(top, 1.0)) throw ComputationError("null correlation matrix is not positive semi-definite");
        if (v < 0.0) {
            if (v < -1e-12 * std::max(top, 1.0)) clipped = true;
            v = 0.0;
        }
    }
    if (clipped) res.warnings.push_back("small negative eigenvalues clipped to zero");
    res.pvalue = weighted_chisq_pvalue(res.statistic, res.eigenvalues, cfg.pvalue_method, cfg.mc_draws, cfg.seed);
    return res;
}

}  // namespace polyspec
