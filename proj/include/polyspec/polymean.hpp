#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyspec/series.hpp"
#include "polyspec/weights.hpp"

namespace polyspec {

inline constexpr int kMaxOrder = 4;

/// True iff no non-empty subset of the indices sums to 0 mod T.
bool submanifold_mask(std::span<const long long> ells, long long T);

/// T^{-1} d(l_1) ... d(l_k) d(-[l]).
cplx kth_periodogram(const DftTable& d, std::span<const long long> ells);

struct PolyMeanEstimate {
    cplx value;
    int k;
    std::size_t T;
    std::optional<double> stderr_;
    std::string weight_label;
};

struct EstimateOptions {
    bool auto_center = true;
    int threads = 0;  // 0: POLYSPEC_THREADS or hardware
};

/// (2 pi)^k T^{-k-1} sum over masked Fourier tuples of
/// d(l_1)...d(l_k) d(-[l]) g(2 pi l / T), summed lexicographically in
/// (l_1, ..., l_k) over the canonical grid.
PolyMeanEstimate estimate_mean(const TimeSeries& series, const WeightFunction& g,
                               const EstimateOptions& opts = {});

/// Several weights of one order sharing a single pass over the grid.
std::vector<PolyMeanEstimate> estimate_means(const TimeSeries& series,
                                             const std::vector<WeightFunction>& weights,
                                             const EstimateOptions& opts = {});

/// Caches weight values on the masked Fourier grid of a fixed length T so that
/// repeated estimates (Monte Carlo loops) only pay for the DFT and the sum.
/// Results equal estimate_means up to summation rounding.
class GridEstimator {
public:
    GridEstimator(std::size_t T, int k, const std::vector<WeightFunction>& weights);

    std::size_t length() const { return T_; }
    int order() const { return k_; }
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

    /// One complex estimate per weight. The series is centered unless
    /// `auto_center` is false.
    std::vector<cplx> estimate(const TimeSeries& series, bool auto_center = true) const;
    std::vector<cplx> estimate(const DftTable& d) const;

private:
    std::size_t T_;
    int k_;
    std::vector<std::string> labels_;
    std::vector<int> tuples_;  // per tuple: residues of l_1..l_k, then -[l]
    std::vector<cplx> values_;              // tuple-major, weight-minor
};

/// T^{-1} sum_{t, t+h in 1..T} X_t X_{t+h}.
double sample_autocovariance(const TimeSeries& series, long long h);
/// T^{-1} sum_{t=1}^{T} X_t X_{(t+h) mod T}.
double circular_autocovariance(const TimeSeries& series, long long h);

/// T^{-1} sum over t with t, t+h1, t+h2 in 1..T of X_t X_{t+h1} X_{t+h2}.
double sample_autocumulant3(const TimeSeries& series, long long h1, long long h2);

/// eta(h1,h2,h3) - g(h1) g(h2-h3) - g(h2) g(h3-h1) - g(h3) g(h2-h1), with eta the
/// fourth-order sample moment and g the sample autocovariance.
double sample_autocumulant4(const TimeSeries& series, long long h1, long long h2, long long h3);

}  // namespace polyspec
