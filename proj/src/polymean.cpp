#include "polyspec/polymean.hpp"

#include <cmath>

#include "polyspec/error.hpp"
#include "polyspec/parallel.hpp"

namespace polyspec {

bool submanifold_mask(std::span<const long long> ells, long long T) {
    const std::size_t k = ells.size();
    if (k > static_cast<std::size_t>(kMaxOrder)) throw UnsupportedOrderError("submanifold_mask: k > 4");
    for (unsigned s = 1; s < (1u << k); ++s) {
        long long sum = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (s & (1u << j)) sum += ells[j];
        if (sum % T == 0) return false;
    }
    return true;
}

cplx kth_periodogram(const DftTable& d, std::span<const long long> ells) {
    cplx prod{1.0, 0.0};
    long long total = 0;
    for (long long l : ells) {
        prod *= d.at(l);
        total += l;
    }
    prod *= d.at(-total);
    return prod / static_cast<double>(d.length());
}

namespace {

void check_weights(const std::vector<WeightFunction>& weights, int& k) {
    if (weights.empty()) throw InputError("no weights supplied");
    k = weights.front().order();
    for (const auto& g : weights)
        if (g.order() != k) throw InputError("all weights must share one order");
    if (k > kMaxOrder) throw UnsupportedOrderError("polyspectral means are limited to k <= 4");
}

// Visits masked tuples whose first index is `first`, in lexicographic order.
// Emits (indices, angles, residue of -[l]).
template <typename Visit>
void visit_tuples(long long T, int k, long long first, Visit&& visit) {
    std::vector<long long> ell(k);
    std::vector<double> lam(k);
    // subset sums of the chosen prefix, indexed by bitmask over positions
    std::vector<long long> sums(std::size_t(1) << k, 0);
    const long long lo = grid_low(T), hi = grid_high(T);
    auto rec = [&](auto& self, int depth) -> void {
        if (depth == k) {
            long long tot = 0;
            for (long long v : ell) tot += v;
            visit(ell, lam, canonical_index(-tot, T));
            return;
        }
        const long long from = depth == 0 ? first : lo;
        const long long to = depth == 0 ? first : hi;
        const std::size_t base = std::size_t(1) << depth;
        for (long long v = from; v <= to; ++v) {
            bool ok = true;
            for (std::size_t s = 0; s < base; ++s) {
                long long sum = sums[s] + v;
                sums[base + s] = sum;
                if (sum % T == 0) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            ell[depth] = v;
            lam[depth] = kTwoPi * static_cast<double>(v) / static_cast<double>(T);
            self(self, depth + 1);
        }
    };
    rec(rec, 0);
}

}  // namespace

std::vector<PolyMeanEstimate> estimate_means(const TimeSeries& series,
                                             const std::vector<WeightFunction>& weights,
                                             const EstimateOptions& opts) {
    int k = 0;
    check_weights(weights, k);
    const TimeSeries x = opts.auto_center ? center(series) : series;
    const long long T = static_cast<long long>(x.size());
    const DftTable d = dft(x);
    const std::size_t nw = weights.size();

    const long long lo = grid_low(T);
    const std::size_t chunks = static_cast<std::size_t>(T);
    std::vector<std::vector<cplx>> partial(chunks, std::vector<cplx>(nw));
    std::vector<int> bad(chunks, 0);
    parallel_chunks(chunks, opts.threads, [&](std::size_t c) {
        auto& acc = partial[c];
        visit_tuples(T, k, lo + static_cast<long long>(c),
                     [&](const std::vector<long long>& ell, const std::vector<double>& lam, long long neg) {
                         cplx prod = d.at(neg);
                         for (long long l : ell) prod *= d.at(l);
                         for (std::size_t w = 0; w < nw; ++w) {
                             if (weights[w].is_zero()) continue;
                             const cplx gv = weights[w](lam);
                             if (!std::isfinite(gv.real()) || !std::isfinite(gv.imag())) bad[c] = 1;
                             acc[w] += prod * gv;
                         }
                     });
    });
    for (int b : bad)
        if (b) throw ComputationError("weight evaluated to a non-finite value on the Fourier grid");

    const double scale = std::pow(kTwoPi, k) / std::pow(static_cast<double>(T), k + 1);
    std::vector<PolyMeanEstimate> out;
    for (std::size_t w = 0; w < nw; ++w) {
        cplx total{0.0, 0.0};
        for (const auto& p : partial) total += p[w];
        out.push_back({total * scale, k, x.size(), std::nullopt, weights[w].label()});
    }
    return out;
}

PolyMeanEstimate estimate_mean(const TimeSeries& series, const WeightFunction& g,
                               const EstimateOptions& opts) {
    return estimate_means(series, std::vector<WeightFunction>{g}, opts).front();
}

GridEstimator::GridEstimator(std::size_t T, int k, const std::vector<WeightFunction>& weights)
    : T_(T), k_(k) {
    if (T < 2) throw InputError("GridEstimator: T must be >= 2");
    if (k < 1 || k > kMaxOrder) throw UnsupportedOrderError("GridEstimator: k must lie in 1..4");
    for (const auto& g : weights) {
        if (g.order() != k) throw InputError("GridEstimator: weight order mismatch");
        labels_.push_back(g.label());
    }
    const long long TT = static_cast<long long>(T);
    const auto res = [TT](long long l) { return static_cast<int>(((l % TT) + TT) % TT); };
    for (long long first = grid_low(TT); first <= grid_high(TT); ++first) {
        visit_tuples(TT, k, first,
                     [&](const std::vector<long long>& ell, const std::vector<double>& lam, long long neg) {
                         for (long long l : ell) tuples_.push_back(res(l));
                         tuples_.push_back(res(neg));
                         for (const auto& g : weights) {
                             const cplx gv = g(lam);
                             if (!std::isfinite(gv.real()) || !std::isfinite(gv.imag()))
                                 throw ComputationError("weight evaluated to a non-finite value on the Fourier grid");
                             values_.push_back(gv);
                         }
                     });
    }
}

std::vector<cplx> GridEstimator::estimate(const TimeSeries& series, bool auto_center) const {
    if (series.size() != T_) throw InputError("GridEstimator: series length mismatch");
    return estimate(dft(auto_center ? center(series) : series));
}

std::vector<cplx> GridEstimator::estimate(const DftTable& d) const {
    if (d.length() != T_) throw InputError("GridEstimator: DFT length mismatch");
    const std::size_t nw = labels_.size();
    std::vector<cplx> acc(nw);
    auto coeff = d.by_residue();
    const cplx* v = values_.data();
    const std::size_t stride = static_cast<std::size_t>(k_) + 1;
    for (std::size_t t = 0; t < tuples_.size(); t += stride) {
        cplx prod = coeff[tuples_[t]];
        for (std::size_t j = 1; j < stride; ++j) prod *= coeff[tuples_[t + j]];
        for (std::size_t w = 0; w < nw; ++w) acc[w] += prod * v[w];
        v += nw;
    }
    const double scale = std::pow(kTwoPi, k_) / std::pow(static_cast<double>(T_), k_ + 1);
    for (auto& a : acc) a *= scale;
    return acc;
}

namespace {

void check_lag(long long h, std::size_t T) {
    if (h <= -static_cast<long long>(T) || h >= static_cast<long long>(T))
        throw InputError("lag out of range: |h| must be < T");
}

// sum over t (0-based) with t + each lag in [0, T) of prod X_{t+lag}
double lagged_product_mean(std::span<const double> x, std::initializer_list<long long> lags) {
    const long long T = static_cast<long long>(x.size());
    long long lo = 0, hi = T - 1;
    for (long long h : lags) {
        lo = std::max(lo, -h);
        hi = std::min(hi, T - 1 - h);
    }
    double acc = 0.0;
    for (long long t = lo; t <= hi; ++t) {
        double p = 1.0;
        for (long long h : lags) p *= x[t + h];
        acc += p;
    }
    return acc / static_cast<double>(T);
}

}  // namespace

double sample_autocovariance(const TimeSeries& series, long long h) {
    check_lag(h, series.size());
    return lagged_product_mean(series.values(), {0, h});
}

double circular_autocovariance(const TimeSeries& series, long long h) {
    const long long T = static_cast<long long>(series.size());
    auto x = series.values();
    double acc = 0.0;
    for (long long t = 0; t < T; ++t) acc += x[t] * x[((t + h) % T + T) % T];
    return acc / static_cast<double>(T);
}

double sample_autocumulant3(const TimeSeries& series, long long h1, long long h2) {
    check_lag(h1, series.size());
    check_lag(h2, series.size());
    return lagged_product_mean(series.values(), {0, h1, h2});
}

double sample_autocumulant4(const TimeSeries& series, long long h1, long long h2, long long h3) {
    const std::size_t T = series.size();
    for (long long h : {h1, h2, h3, h2 - h3, h3 - h1, h2 - h1}) check_lag(h, T);
    const double eta = lagged_product_mean(series.values(), {0, h1, h2, h3});
    auto g = [&](long long h) { return sample_autocovariance(series, h); };
    return eta - g(h1) * g(h2 - h3) - g(h2) * g(h3 - h1) - g(h3) * g(h2 - h1);
}

}  // namespace polyspec
