#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyspec/asymvar.hpp"
#include "polyspec/models.hpp"
#include "polyspec/series.hpp"

namespace polyspec {

enum class PvalueMethod { MonteCarlo, Imhof };

PvalueMethod parse_pvalue_method(std::string_view name);
std::string to_string(PvalueMethod method);

struct LinTestConfig {
    int M = 10;
    LinearModel model{{}, {}, Innovation::Gauss01};
    int grid_n = 64;
    PvalueMethod pvalue_method = PvalueMethod::MonteCarlo;
    std::size_t mc_draws = 200000;
    std::uint64_t seed = 42;
    /// kappa_2..kappa_6 for the null variance. When unset, blt_statistic uses
    /// residual_cumulants and null_cov uses the model's own cumulants.
    std::optional<std::array<double, 5>> cumulants;
    int threads = 0;
};

struct LinTestTerm {
    int j;
    int k;
    cplx estimate;
    double variance;
    double contribution;  // T |M|^2 / V
};

struct LinTestResult {
    double statistic = 0.0;
    double pvalue = 1.0;
    std::size_t T = 0;
    int M = 0;
    std::vector<LinTestTerm> per_term;
    std::vector<double> eigenvalues;
    std::array<double, 5> cumulants{};
    std::vector<std::string> warnings;
};

/// (j, k) in [0, M]^2 without (0, 0), j-major.
std::vector<std::pair<int, int>> lintest_index_set(int M);

/// Method-of-moments kappa_2..kappa_6 of eps = psi(B)^{-1} X (centered).
std::array<double, 5> residual_cumulants(const TimeSeries& series, const LinearModel& model);

/// M-hat for every lintest weight of index_set(M), sharing one pass.
/// Equal to estimate_means with lintest_weight up to rounding.
std::vector<cplx> lintest_estimates(const TimeSeries& series, const LinearModel& model, int M,
                                    int threads = 0);

/// Null covariances V_{g_a, g_b} over the index set, exact for filter-cancelling weights.
CovMatrix null_covariance(const LinearModel& model, int M);
/// Correlation form of null_covariance (unit diagonal).
CovMatrix null_cov(const LinTestConfig& config);

/// Eigenvalues of a symmetric matrix, descending.
std::vector<double> eigenvalues_sym(const CovMatrix& matrix);

/// P(sum nu_j zeta_j > x), zeta_j iid chi^2_1.
double weighted_chisq_pvalue(double x, std::vector<double> nu, PvalueMethod method,
                             std::size_t draws = 200000, std::uint64_t seed = 42);

LinTestResult blt_statistic(const TimeSeries& series, const LinTestConfig& config);

}  // namespace polyspec
