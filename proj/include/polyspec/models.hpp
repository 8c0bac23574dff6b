#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polyspec/series.hpp"

namespace polyspec {

/// Innovation laws used by the simulation models. All are mean zero.
enum class Innovation { Exp1m1, ChiSq4m4, Gauss01 };

Innovation parse_innovation(std::string_view tag);
std::string to_string(Innovation innov);

/// r-th cumulant of the innovation law, r >= 1 (kappa_1 = 0).
double innovation_cumulant(Innovation innov, int r);
/// (kappa_2, ..., kappa_6).
std::array<double, 5> innovation_cumulants(Innovation innov);
/// Raw moments E eps^n for n = 0..max_order.
std::vector<double> innovation_moments(Innovation innov, int max_order);

/// Causal ARMA filter psi(z) = theta(z)/phi(z) driven by i.i.d. innovations,
/// with phi(z) = 1 - ar[0] z - ... and theta(z) = 1 + ma[0] z + ...
class LinearModel {
public:
    /// `cumulants` holds kappa_2..kappa_6. Throws InputError when phi has a
    /// root inside or on the unit circle or kappa_2 <= 0.
    LinearModel(std::vector<double> ar, std::vector<double> ma, std::array<double, 5> cumulants);
    LinearModel(std::vector<double> ar, std::vector<double> ma, Innovation innov);

    const std::vector<double>& ar() const { return ar_; }
    const std::vector<double>& ma() const { return ma_; }
    const std::array<double, 5>& cumulants() const { return cumulants_; }
    /// kappa_r for r in 2..6.
    double cumulant(int r) const;

    bool same_filter(const LinearModel& other) const { return ar_ == other.ar_ && ma_ == other.ma_; }
    LinearModel with_cumulants(std::array<double, 5> cumulants) const;

    /// First n coefficients of the MA(infinity) expansion of psi.
    std::vector<double> psi_weights(std::size_t n) const;

private:
    std::vector<double> ar_;
    std::vector<double> ma_;
    std::array<double, 5> cumulants_;
};

/// psi(e^{-i lambda}) = theta(e^{-i lambda}) / phi(e^{-i lambda}).
cplx transfer(const LinearModel& model, double lambda);

/// f_r(nu) = kappa_{r+1} prod_j psi(e^{-i nu_j}) * psi(e^{i [nu]}), r in 1..5.
cplx linear_polyspectrum(const LinearModel& model, int r, std::span<const double> nu);

/// Replaces kappa_4 by the fourth central moment kappa_4 + 3 kappa_2^2. For
/// Exp(1)-1 innovations this turns the trispectrum constant 6 into 9. Only
/// meant for side-by-side comparisons.
LinearModel with_fourth_moment_constant(const LinearModel& model);

/// X_t = J1 Z_t + J2 (Z_t^2 - 1), Z_t = eps_t + theta eps_{t-1}.
struct HermiteModel {
    double J1 = 2.0;
    double J2 = 5.0;
    double ma1_theta = 0.4;
    Innovation innovation = Innovation::Exp1m1;
};

struct HermiteCumulants {
    double gamma2;  // gamma(h1)
    double gamma3;  // gamma_3(h1, h2)
};

/// Closed-form second and third autocumulants written in terms of the MA(1)
/// autocovariance c(h) of Z_t. The expressions carry a sqrt(2) normalisation
/// of the second Hermite polynomial and are evaluated verbatim.
HermiteCumulants hermite_autocumulants(const HermiteModel& model, long long h1, long long h2);

/// A finite-memory polynomial in the innovations:
///   X_t = sum_terms coef * prod_(lag, power) eps_{t-lag}^power.
/// Joint moments and cumulants of any order are exact.
class PolynomialProcess {
public:
    struct Term {
        double coef;
        std::vector<std::pair<int, int>> factors;  // (lag >= 0, power >= 1)
    };

    PolynomialProcess(std::vector<Term> terms, Innovation innov, std::string label);

    int memory() const { return memory_; }
    int degree() const { return degree_; }
    Innovation innovation() const { return innov_; }
    const std::vector<Term>& terms() const { return terms_; }
    const std::string& label() const { return label_; }

    /// X_t given eps_{t-lag} = window[lag] for lag = 0..memory().
    double evaluate(std::span<const double> window) const;

    /// E prod_i X_{t_i}. Results are memoised; not safe for concurrent calls.
    double moment(std::span<const long long> times) const;
    /// Cum(X_0, X_{h_1}, ..., X_{h_{r-1}}).
    double cumulant(std::span<const long long> lags) const;

private:
    std::vector<Term> terms_;
    Innovation innov_;
    std::string label_;
    int memory_ = 0;
    int degree_ = 0;
    std::vector<double> eps_moments_;
    mutable std::map<std::vector<long long>, double> moment_cache_;
    mutable std::map<std::vector<long long>, double> cumulant_cache_;
};

PolynomialProcess hermite_process(const HermiteModel& model);
/// X_t = eps_t + 0.4 eps_{t-1} + theta (eps_{t-1}^2 - 1) with Gaussian eps.
PolynomialProcess quadma_process(double theta);
PolynomialProcess ma_process(const std::vector<double>& ma, Innovation innov);

/// Autocumulants of orders 2..max_order of a finite-memory process, stored on
/// dense lag boxes, plus polyspectra evaluated from them.
class CumulantSpectra {
public:
    explicit CumulantSpectra(const PolynomialProcess& process, int max_order = 6);

    int max_order() const { return max_order_; }
    /// Lags range over [-radius(r), radius(r)] in every coordinate.
    int radius(int order) const { return (order - 1) * memory_; }
    /// gamma_order(lags), zero outside the stored box.
    double cumulant(int order, std::span<const long long> lags) const;
    /// f_r(nu) = sum_h gamma_{r+1}(h) exp(-i h . nu).
    cplx polyspectrum(int r, std::span<const double> nu) const;
    /// f_r on the grid 2*pi*n/N for every n in [0, N)^r, row-major.
    std::vector<cplx> polyspectrum_grid(int r, int N) const;
    const std::string& label() const { return label_; }

private:
    std::size_t offset(int order, std::span<const long long> lags) const;

    int max_order_;
    int memory_;
    std::string label_;
    std::vector<std::vector<double>> tables_;  // index order - 2
};

/// A named generative model: either a linear ARMA filter or a finite-memory
/// polynomial process.
struct ModelSpec {
    std::string label;
    std::optional<LinearModel> linear;
    std::optional<PolynomialProcess> polynomial;
    Innovation innovation = Innovation::Gauss01;
};

/// Accepts "ar2-exp", "ar2-chisq", "arma21-exp", "arma21-chisq", "hermite",
/// "quadma:theta=<v>", "ar1:phi=<v>", "ma1:theta=<v>", "white",
/// "arma:ar=<a1>/<a2>,ma=<m1>" and an optional ",innov=exp|chisq|gauss".
ModelSpec parse_model(std::string_view spec);

}  // namespace polyspec
