#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyspec/models.hpp"
#include "polyspec/series.hpp"

namespace polyspec {

/// Marks g = exp(i(j x1 + k x2)) / Psi(x1, x2) for the filter of `model`, so
/// that g * Psi can be formed without dividing by Psi.
struct FilterCancel {
    LinearModel model;
    int j;
    int k;
};

/// A complex weight g on the k-torus, evaluated at angular frequencies in
/// (-pi, pi]^k.
class WeightFunction {
public:
    using Fn = std::function<cplx(std::span<const double>)>;

    WeightFunction(int order, Fn fn, bool claims_symmetry, std::string label);

    int order() const { return order_; }
    bool claims_symmetry() const { return symmetric_; }
    const std::string& label() const { return label_; }
    cplx operator()(std::span<const double> lambda) const { return fn_(lambda); }
    cplx operator()(double l1) const;
    cplx operator()(double l1, double l2) const;

    /// Set for lag weights: g = (2 pi)^{-k} exp(i sum h_j lambda_j).
    const std::optional<std::vector<long long>>& lags() const { return lags_; }
    const std::optional<FilterCancel>& filter_cancel() const { return cancel_; }
    bool is_zero() const { return zero_; }

    WeightFunction& set_lags(std::vector<long long> h);
    WeightFunction& set_filter_cancel(FilterCancel c);
    WeightFunction& set_zero();

private:
    int order_;
    Fn fn_;
    bool symmetric_;
    std::string label_;
    std::optional<std::vector<long long>> lags_;
    std::optional<FilterCancel> cancel_;
    bool zero_ = false;
};

/// Largest |g(-x) - conj(g(x))| over the shifted grid 2 pi n / N,
/// n in (-N/2, N/2], excluding points whose negation leaves (-pi, pi]^k.
double symmetry_defect(const WeightFunction& g, int N = 32);
/// symmetry_defect(g, N) <= tol.
bool check_symmetry(const WeightFunction& g, int N = 32, double tol = 1e-10);

WeightFunction lag_weight(int k, std::vector<long long> h);
/// Closed-interval rectangle indicator on the 2-torus.
WeightFunction band_indicator(double a1, double b1, double a2, double b2);
/// 1 when a < l1^2 + l2^2 <= b.
WeightFunction annulus_indicator(double a, double b);
/// (pi - |l1|)(pi - |l2|).
WeightFunction bartlett_weight();
/// scale * cos(3 l1) cos(l2); the default scale is (4 pi)^{-2}.
WeightFunction cosine_product_weight(double scale = 1.0 / (16.0 * kPi * kPi));
/// 1 - sqrt((l1^2 + l2^2) / 2).
WeightFunction cone_weight();
/// g = l_axis; odd, so it does not claim the symmetry condition.
WeightFunction wcob_numerator_weight(int axis);
WeightFunction constant_weight(int k, double c);
WeightFunction zero_weight(int k);

/// g_{j,k}(x) = exp(i(j x1 + k x2)) / Psi(x1, x2) with
/// Psi = psi(e^{-i x1}) psi(e^{-i x2}) psi(e^{i(x1+x2)}). Throws
/// SingularFilterError when |Psi| < 1e-8 on the grid_n x grid_n grid.
WeightFunction lintest_weight(int j, int k, const LinearModel& model, int grid_n = 64);

/// Psi(x1, x2) for the lintest weights.
cplx filter_triple(const LinearModel& model, double x1, double x2);

/// Nearest-node lookup into values on the grid 2 pi n / N, n in [0, N)^k
/// (row-major, wrapping indices mod N).
WeightFunction tabulated_weight(int k, int N, std::vector<cplx> values, bool claims_symmetry,
                                std::string label);

/// Builds a catalog weight from its label: "lag:h=3", "lag:h1=3,h2=1",
/// "band:a1=..,b1=..,a2=..,b2=..", "annulus:a=0.1,b=0.2", "bartlett",
/// "cosprod[:scale=..]", "cone", "wcob:axis=1", "const:c=..", "zero",
/// "lintest:j=1,k=2". `k` (when positive) is the expected order; `model` is
/// required for lintest weights.
WeightFunction parse_weight(std::string_view label, int k = 0, const LinearModel* model = nullptr);

}  // namespace polyspec
