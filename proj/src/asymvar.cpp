#include "polyspec/asymvar.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "polyspec/error.hpp"
#include "polyspec/parallel.hpp"
#include "polyspec/partitions.hpp"
#include "polyspec/polymean.hpp"
#include "polyspec/simlab.hpp"

namespace polyspec {

namespace {

int mod(long long a, int N) {
    long long r = a % N;
    return static_cast<int>(r < 0 ? r + N : r);
}

// One partition scheme prepared for integration over its free coordinates.
struct SchemePlan {
    int m = 0;
    int D = 0;                 // free dimensions: k lambdas + free omegas
    std::vector<int> free_om;  // omega columns (< k) left free
    struct Pivot {
        int col;
        std::vector<int> a_cols;  // {lambda} columns in the row, may include k
        std::vector<int> b_cols;  // other omega columns in the row
    };
    std::vector<Pivot> pivots;
    struct Arg {
        bool lambda;
        int col;
    };
    std::vector<std::vector<Arg>> blocks;  // first r_j arguments of each block
    std::vector<int> orders;
};

SchemePlan plan_scheme(const PartitionScheme& s, int k) {
    SchemePlan p;
    p.m = s.m;
    p.orders = s.block_orders;
    const int dropped = s.B.owner(k);
    std::vector<bool> pivot(k, false);
    for (int row = 0; row < s.m; ++row) {
        if (row == dropped) continue;
        SchemePlan::Pivot pv{-1, {}, {}};
        for (int c = 0; c < k; ++c) {
            if (!s.B.at(row, c)) continue;
            if (pv.col < 0) {
                pv.col = c;
                pivot[c] = true;
            } else {
                pv.b_cols.push_back(c);
            }
        }
        if (pv.col < 0) throw ComputationError("partition scheme row without a pivot");
        for (int c = 0; c <= k; ++c)
            if (s.A.at(row, c)) pv.a_cols.push_back(c);
        p.pivots.push_back(std::move(pv));
    }
    for (int c = 0; c < k; ++c)
        if (!pivot[c]) p.free_om.push_back(c);
    p.D = k + static_cast<int>(p.free_om.size());
    for (int row = 0; row < s.m; ++row) {
        std::vector<SchemePlan::Arg> args;
        for (int c = 0; c <= k; ++c)
            if (s.A.at(row, c)) args.push_back({true, c});
        for (int c = 0; c <= k; ++c)
            if (s.B.at(row, c)) args.push_back({false, c});
        args.resize(s.block_orders[row]);
        p.blocks.push_back(std::move(args));
    }
    return p;
}

// Integer coefficients of omega_0..omega_{k-1} in the free coordinates.
std::vector<std::vector<long long>> omega_coefficients(const SchemePlan& p, int k) {
    const int D = p.D;
    auto unit = [D](int i) {
        std::vector<long long> v(D, 0);
        v[i] = 1;
        return v;
    };
    std::vector<std::vector<long long>> lam(k + 1), om(k);
    for (int c = 0; c < k; ++c) lam[c] = unit(c);
    lam[k].assign(D, 0);
    for (int c = 0; c < k; ++c) lam[k][c] = -1;
    for (std::size_t f = 0; f < p.free_om.size(); ++f) om[p.free_om[f]] = unit(k + static_cast<int>(f));
    for (const auto& pv : p.pivots) {
        std::vector<long long> v(D, 0);
        for (int c : pv.a_cols)
            for (int d = 0; d < D; ++d) v[d] += lam[c][d];
        for (int c : pv.b_cols)
            for (int d = 0; d < D; ++d) v[d] -= om[c][d];
        om[pv.col] = std::move(v);
    }
    return om;
}

double kappa_product(const LinearModel& model, const std::vector<int>& orders) {
    double prod = 1.0;
    for (int r : orders) prod *= model.cumulant(r + 1);
    return prod;
}

}  // namespace

SpectraSource spectra_source(const ModelSpec& model, int k) {
    if (model.linear) return *model.linear;
    if (model.polynomial) return std::make_shared<const CumulantSpectra>(*model.polynomial, 2 * k + 2);
    throw InputError("model has neither a linear nor a polynomial form");
}

struct VarianceEngine::Grids {
    int N = 0;
    int k = 0;
    std::size_t cells = 0;                 // N^k
    bool linear = false;
    std::vector<std::vector<cplx>> W;      // per weight: g (table source) or g * Psi (linear)
    std::vector<std::vector<cplx>> F;      // table source: f_r on N^r, index r-1
    std::vector<SchemePlan> plans;         // schemes with m >= 2
    std::vector<double> kappa;             // linear source: per plan
    double kappa_top = 0.0;                // linear source: kappa_{2k+2}
    std::shared_ptr<const CumulantSpectra> table;
};

VarianceEngine::VarianceEngine(VarianceRequest request) : req_(std::move(request)) {
    const int k = req_.k;
    if (k != 1 && k != 2) throw UnsupportedOrderError("variance integrals are available for k = 1 and k = 2");
    if (req_.grid_n < 16 || req_.grid_n % 2 != 0) throw InputError("grid_n must be even and >= 16");
    if (req_.weights.empty()) throw InputError("variance request needs at least one weight");
    for (const auto& g : req_.weights)
        if (g.order() != k) throw InputError("weight '" + g.label() + "' does not match order k");

    auto grids = std::make_shared<Grids>();
    const int N = req_.grid_n;
    grids->N = N;
    grids->k = k;
    grids->cells = k == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;

    std::vector<double> ang(N);
    for (int n = 0; n < N; ++n) ang[n] = kTwoPi * static_cast<double>(n > N / 2 ? n - N : n) / N;

    const LinearModel* lin = std::get_if<LinearModel>(&req_.source);
    grids->linear = lin != nullptr;
    std::vector<cplx> psi_k;
    if (lin) {
        std::vector<cplx> psi(N);
        for (int n = 0; n < N; ++n) psi[n] = transfer(*lin, ang[n]);
        psi_k.resize(grids->cells);
        for (std::size_t c = 0; c < grids->cells; ++c) {
            if (k == 1) {
                psi_k[c] = psi[c] * psi[mod(-static_cast<long long>(c), N)];
            } else {
                const int a = static_cast<int>(c / N), b = static_cast<int>(c % N);
                psi_k[c] = psi[a] * psi[b] * psi[mod(-(a + b), N)];
            }
        }
        grids->kappa_top = lin->cumulant(2 * k + 2);
    } else {
        grids->table = std::get<std::shared_ptr<const CumulantSpectra>>(req_.source);
        if (!grids->table) throw InputError("empty cumulant table");
        if (grids->table->max_order() < 2 * k + 2)
            throw InputError("cumulant table must reach order 2k+2");
        for (int r = 1; r <= 2 * k - 1; ++r) grids->F.push_back(grids->table->polyspectrum_grid(r, N));
    }

    for (const auto& g : req_.weights) {
        std::vector<cplx> w(grids->cells);
        const auto& fc = g.filter_cancel();
        const bool cancel = lin && fc && k == 2 && fc->model.same_filter(*lin);
        std::vector<double> x(k);
        for (std::size_t c = 0; c < grids->cells; ++c) {
            if (k == 1) {
                x[0] = ang[c];
            } else {
                x[0] = ang[c / N];
                x[1] = ang[c % N];
            }
            if (g.is_zero()) {
                w[c] = 0.0;
            } else if (cancel) {
                w[c] = std::polar(1.0, fc->j * x[0] + fc->k * x[1]);
            } else {
                cplx v = g(x);
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    throw ComputationError("weight '" + g.label() + "' is not finite on the grid");
                w[c] = lin ? v * psi_k[c] : v;
            }
        }
        grids->W.push_back(std::move(w));
    }

    for (int m = 2; m <= k + 1; ++m)
        for (const auto& s : partition_schemes(k, m, req_.ordered_schemes)) {
            grids->plans.push_back(plan_scheme(s, k));
            if (lin) grids->kappa.push_back(kappa_product(*lin, s.block_orders));
        }
    grids_ = std::move(grids);
}

bool VarianceEngine::analytic_pair(std::size_t i, std::size_t n) const {
    const auto* lin = std::get_if<LinearModel>(&req_.source);
    if (!lin || req_.k != 2) return false;
    const auto& a = req_.weights[i].filter_cancel();
    const auto& b = req_.weights[n].filter_cancel();
    return a && b && a->model.same_filter(*lin) && b->model.same_filter(*lin);
}

cplx VarianceEngine::analytic_covariance(std::size_t i, std::size_t n) const {
    const auto& a = *req_.weights[i].filter_cancel();
    const auto& b = *req_.weights[n].filter_cancel();
    return lintest_covariance(std::get<LinearModel>(req_.source), a.j, a.k, b.j, b.k, req_.ordered_schemes);
}

std::vector<cplx> VarianceEngine::block(const std::vector<std::size_t>& rows,
                                        const std::vector<std::size_t>& cols) const {
    const Grids& G = *grids_;
    const int N = G.N, k = G.k;
    const std::size_t R = rows.size(), C = cols.size();
    std::vector<cplx> out(R * C);
    const double h = kTwoPi / N;

    // m = 1: a single block holding every frequency
    if (G.linear) {
        std::vector<cplx> sr(R), sc(C);
        for (std::size_t a = 0; a < R; ++a)
            for (const auto& v : G.W[rows[a]]) sr[a] += v;
        for (std::size_t b = 0; b < C; ++b)
            for (const auto& v : G.W[cols[b]]) sc[b] += v;
        const double scale = G.kappa_top * std::pow(h, 2 * k);
        for (std::size_t a = 0; a < R; ++a)
            for (std::size_t b = 0; b < C; ++b) out[a * C + b] += scale * sr[a] * std::conj(sc[b]);
    } else {
        // sum_h gamma_{2k+2}(h) ghat_i(h_{1..k} - h_{k+1}) conj(ghat_n(h_{k+2..2k+1}))
        const auto& tab = *G.table;
        const int order = 2 * k + 2;
        const int Rad = tab.radius(order);
        const int A = 2 * Rad;
        const int L = 2 * A + 1;
        std::vector<cplx> tw(static_cast<std::size_t>(L) * N);
        for (int a = 0; a < L; ++a)
            for (int n = 0; n < N; ++n) tw[a * N + n] = std::polar(1.0, -kTwoPi * mod((a - A) * static_cast<long long>(n), N) / N);
        auto ghat = [&](const std::vector<cplx>& w) {
            std::size_t size = k == 1 ? L : static_cast<std::size_t>(L) * L;
            std::vector<cplx> out_hat(size);
            const double sc = std::pow(h, k);
            if (k == 1) {
                for (int a = 0; a < L; ++a) {
                    cplx acc;
                    for (int n = 0; n < N; ++n) acc += w[n] * tw[a * N + n];
                    out_hat[a] = acc * sc;
                }
            } else {
                std::vector<cplx> half(static_cast<std::size_t>(N) * L);
                for (int n1 = 0; n1 < N; ++n1)
                    for (int a2 = 0; a2 < L; ++a2) {
                        cplx acc;
                        for (int n2 = 0; n2 < N; ++n2) acc += w[n1 * N + n2] * tw[a2 * N + n2];
                        half[n1 * L + a2] = acc;
                    }
                for (int a1 = 0; a1 < L; ++a1)
                    for (int a2 = 0; a2 < L; ++a2) {
                        cplx acc;
                        for (int n1 = 0; n1 < N; ++n1) acc += half[n1 * L + a2] * tw[a1 * N + n1];
                        out_hat[a1 * L + a2] = acc * sc;
                    }
            }
            return out_hat;
        };
        std::vector<std::vector<cplx>> hr, hc;
        for (auto i : rows) hr.push_back(ghat(G.W[i]));
        for (auto i : cols) hc.push_back(ghat(G.W[i]));
        const int nl = 2 * k + 1;
        const int LR = 2 * Rad + 1;
        std::vector<long long> lags(nl);
        std::size_t total = 1;
        for (int d = 0; d < nl; ++d) total *= LR;
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            for (int d = nl - 1; d >= 0; --d) {
                lags[d] = static_cast<long long>(rem % LR) - Rad;
                rem /= LR;
            }
            const double gam = tab.cumulant(order, lags);
            if (gam == 0.0) continue;
            std::size_t ia, ib;
            if (k == 1) {
                ia = static_cast<std::size_t>(lags[0] - lags[1] + A);
                ib = static_cast<std::size_t>(lags[2] + A);
            } else {
                ia = static_cast<std::size_t>(lags[0] - lags[2] + A) * L + static_cast<std::size_t>(lags[1] - lags[2] + A);
                ib = static_cast<std::size_t>(lags[3] + A) * L + static_cast<std::size_t>(lags[4] + A);
            }
            for (std::size_t a = 0; a < R; ++a)
                for (std::size_t b = 0; b < C; ++b) out[a * C + b] += gam * hr[a][ia] * std::conj(hc[b][ib]);
        }
    }

    // m >= 2: Riemann sums over the free coordinates
    for (std::size_t pi = 0; pi < G.plans.size(); ++pi) {
        const SchemePlan& p = G.plans[pi];
        const double scale = std::pow(kTwoPi, p.m - 1) * std::pow(h, p.D) * (G.linear ? G.kappa[pi] : 1.0);
        if (scale == 0.0) continue;
        const std::size_t chunks = static_cast<std::size_t>(N);
        std::size_t inner = 1;
        for (int d = 1; d < p.D; ++d) inner *= N;
        std::vector<std::vector<cplx>> partial(chunks, std::vector<cplx>(R * C));
        parallel_chunks(chunks, req_.threads, [&](std::size_t chunk) {
            auto& acc = partial[chunk];
            std::vector<int> fr(p.D, 0), L(k + 1), O(k + 1), args;
            fr[0] = static_cast<int>(chunk);
            std::vector<cplx> wr(R), wc(C);
            for (std::size_t it = 0; it < inner; ++it) {
                std::size_t rem = it;
                for (int d = p.D - 1; d >= 1; --d) {
                    fr[d] = static_cast<int>(rem % N);
                    rem /= N;
                }
                long long sl = 0;
                for (int c = 0; c < k; ++c) {
                    L[c] = fr[c];
                    sl += fr[c];
                }
                L[k] = mod(-sl, N);
                for (std::size_t f = 0; f < p.free_om.size(); ++f) O[p.free_om[f]] = fr[k + f];
                for (const auto& pv : p.pivots) {
                    long long v = 0;
                    for (int c : pv.a_cols) v += L[c];
                    for (int c : pv.b_cols) v -= O[c];
                    O[pv.col] = mod(v, N);
                }
                long long so = 0;
                for (int c = 0; c < k; ++c) so += O[c];
                O[k] = mod(-so, N);

                cplx prod{1.0, 0.0};
                if (!G.linear) {
                    for (std::size_t j = 0; j < p.blocks.size(); ++j) {
                        std::size_t idx = 0;
                        for (const auto& arg : p.blocks[j])
                            idx = idx * N + static_cast<std::size_t>(arg.lambda ? L[arg.col] : mod(-O[arg.col], N));
                        prod *= G.F[p.orders[j] - 1][idx];
                    }
                    if (prod == cplx(0.0, 0.0)) continue;
                }
                const std::size_t li = k == 1 ? L[0] : static_cast<std::size_t>(L[0]) * N + L[1];
                const std::size_t oi = k == 1 ? O[0] : static_cast<std::size_t>(O[0]) * N + O[1];
                for (std::size_t a = 0; a < R; ++a) wr[a] = G.W[rows[a]][li] * prod;
                for (std::size_t b = 0; b < C; ++b) wc[b] = std::conj(G.W[cols[b]][oi]);
                for (std::size_t a = 0; a < R; ++a)
                    for (std::size_t b = 0; b < C; ++b) acc[a * C + b] += wr[a] * wc[b];
            }
        });
        for (const auto& part : partial)
            for (std::size_t e = 0; e < R * C; ++e) out[e] += scale * part[e];
    }
    return out;
}

cplx VarianceEngine::covariance(std::size_t i, std::size_t n) const {
    if (i >= size() || n >= size()) throw InputError("weight index out of range");
    if (req_.weights[i].is_zero() || req_.weights[n].is_zero()) return {0.0, 0.0};
    if (analytic_pair(i, n)) return analytic_covariance(i, n);
    return block({i}, {n}).front();
}

double VarianceEngine::variance(std::size_t i, std::size_t n) const {
    const cplx v = covariance(i, n);
    if (req_.weights[i].claims_symmetry() && req_.weights[n].claims_symmetry() &&
        std::abs(v.imag()) > 1e-6 * (1.0 + std::abs(v)))
        throw ComputationError("variance integral has a non-negligible imaginary part");
    return v.real();
}

std::vector<cplx> VarianceEngine::raw_matrix() const {
    const std::size_t d = size();
    bool all_analytic = true;
    for (std::size_t i = 0; i < d && all_analytic; ++i)
        for (std::size_t n = 0; n < d && all_analytic; ++n) all_analytic = analytic_pair(i, n);
    std::vector<cplx> raw(d * d);
    if (all_analytic) {
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t n = 0; n < d; ++n) raw[i * d + n] = analytic_covariance(i, n);
    } else {
        std::vector<std::size_t> all(d);
        for (std::size_t i = 0; i < d; ++i) all[i] = i;
        raw = block(all, all);
    }
    return raw;
}

CovMatrix VarianceEngine::cov_matrix() const {
    const std::size_t d = size();
    const auto raw = raw_matrix();
    CovMatrix out;
    out.dim = d;
    out.entries.assign(d * d, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(raw[i * d + i]));
    for (std::size_t i = 0; i < d; ++i) {
        out.labels.push_back(req_.weights[i].label());
        for (std::size_t n = 0; n < d; ++n) {
            const cplx v = raw[i * d + n];
            if (req_.weights[i].claims_symmetry() && req_.weights[n].claims_symmetry() &&
                std::abs(v.imag()) > 1e-6 * (1.0 + std::abs(v)))
                throw ComputationError("variance integral has a non-negligible imaginary part");
            if (std::abs(v.real() - raw[n * d + i].real()) > 1e-9 * std::max(1.0, scale))
                throw ComputationError("covariance matrix is not symmetric before symmetrisation");
            out(i, n) = 0.5 * (v.real() + raw[n * d + i].real());
        }
    }
    Eigen::MatrixXd M(d, d);
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        trace += out(i, i);
        for (std::size_t n = 0; n < d; ++n) M(i, n) = out(i, n);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    if (d > 0 && es.eigenvalues().minCoeff() < -1e-8 * std::max(std::abs(trace), 1e-300))
        throw ComputationError("covariance matrix is not positive semi-definite");
    return out;
}

double variance(const VarianceRequest& request, std::size_t i, std::size_t n) {
    return VarianceEngine(request).variance(i, n);
}

CovMatrix cov_matrix(const VarianceRequest& request) { return VarianceEngine(request).cov_matrix(); }

namespace {

struct SchemeExponent {
    std::vector<int> orders;
    std::vector<std::vector<long long>> omega;  // omega_c coefficients in the free coordinates
};

const std::vector<SchemeExponent>& scheme_exponents(bool ordered) {
    static const auto build = [](bool ord) {
        std::vector<SchemeExponent> out;
        for (int m = 1; m <= 3; ++m)
            for (const auto& s : partition_schemes(2, m, ord)) {
                const SchemePlan p = plan_scheme(s, 2);
                out.push_back({s.block_orders, omega_coefficients(p, 2)});
            }
        return out;
    };
    static const std::vector<SchemeExponent> unordered = build(false);
    static const std::vector<SchemeExponent> ordered_set = build(true);
    return ordered ? ordered_set : unordered;
}

}  // namespace

double lintest_covariance(const LinearModel& model, int j1, int k1, int j2, int k2, bool ordered) {
    double total = 0.0;
    for (const auto& s : scheme_exponents(ordered)) {
        bool zero = true;
        for (std::size_t d = 0; d < s.omega[0].size() && zero; ++d) {
            long long c = -(static_cast<long long>(j2) * s.omega[0][d] + static_cast<long long>(k2) * s.omega[1][d]);
            if (d == 0) c += j1;
            if (d == 1) c += k1;
            zero = c == 0;
        }
        if (zero) total += kappa_product(model, s.orders);
    }
    return std::pow(kTwoPi, 4) * total;
}

cplx polyspectral_mean(const WeightFunction& g, const SpectraSource& source, int grid_n) {
    const int k = g.order();
    if (k < 1 || k > 3) throw UnsupportedOrderError("polyspectral_mean: k must lie in 1..3");
    if (grid_n < 2) throw InputError("grid_n must be >= 2");
    const int N = grid_n;
    std::size_t cells = 1;
    for (int d = 0; d < k; ++d) cells *= N;
    std::vector<cplx> f;
    const LinearModel* lin = std::get_if<LinearModel>(&source);
    if (!lin) f = std::get<std::shared_ptr<const CumulantSpectra>>(source)->polyspectrum_grid(k, N);
    std::vector<double> x(k);
    cplx acc{0.0, 0.0};
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t rem = c;
        for (int d = k - 1; d >= 0; --d) {
            const int n = static_cast<int>(rem % N);
            rem /= N;
            x[d] = kTwoPi * static_cast<double>(n > N / 2 ? n - N : n) / N;
        }
        const cplx fv = lin ? linear_polyspectrum(*lin, k, x) : f[c];
        acc += g(x) * fv;
    }
    return acc * std::pow(kTwoPi / N, k);
}

CovMatrix mc_cov_oracle(const ModelSpec& model, const std::vector<WeightFunction>& weights,
                        std::size_t T, std::size_t replicates, std::uint64_t seed,
                        std::size_t burn_in, int threads) {
    if (weights.empty()) throw InputError("mc_cov_oracle needs at least one weight");
    if (replicates < 2) throw InputError("mc_cov_oracle needs at least two replicates");
    const int k = weights.front().order();
    GridEstimator est(T, k, weights);
    const std::size_t d = weights.size();
    std::vector<double> vals(replicates * d);
    const std::size_t chunk = 16;
    const std::size_t nchunks = (replicates + chunk - 1) / chunk;
    guarded_chunks(nchunks, threads, [&](std::size_t c) {
        for (std::size_t r = c * chunk; r < std::min(replicates, (c + 1) * chunk); ++r) {
            Rng rng(seed, r);
            auto x = simulate(model, T, rng, burn_in);
            auto e = est.estimate(x);
            for (std::size_t i = 0; i < d; ++i) vals[r * d + i] = e[i].real();
        }
    });
    std::vector<double> mean(d, 0.0);
    for (std::size_t r = 0; r < replicates; ++r)
        for (std::size_t i = 0; i < d; ++i) mean[i] += vals[r * d + i];
    for (auto& v : mean) v /= static_cast<double>(replicates);
    CovMatrix out;
    out.dim = d;
    out.entries.assign(d * d, 0.0);
    for (const auto& g : weights) out.labels.push_back(g.label());
    for (std::size_t r = 0; r < replicates; ++r)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t n = 0; n < d; ++n)
                out(i, n) += (vals[r * d + i] - mean[i]) * (vals[r * d + n] - mean[n]);
    for (auto& v : out.entries) v *= static_cast<double>(T) / static_cast<double>(replicates - 1);
    return out;
}

}  // namespace polyspec
