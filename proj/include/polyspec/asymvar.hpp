#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "polyspec/models.hpp"
#include "polyspec/weights.hpp"

namespace polyspec {

/// Polyspectra feeding the variance integrals: a linear filter in closed form
/// or tabulated cumulants of a finite-memory process.
using SpectraSource = std::variant<std::shared_ptr<const CumulantSpectra>, LinearModel>;

/// Closed form for linear models, tabulated cumulants (orders up to 2k+2)
/// for polynomial ones.
SpectraSource spectra_source(const ModelSpec& model, int k);

struct VarianceRequest {
    int k = 2;
    std::vector<WeightFunction> weights;
    SpectraSource source;
    int grid_n = 64;
    /// Sum over ordered (A, B) pairs instead of unordered partitions.
    bool ordered_schemes = false;
    int threads = 0;
};

/// d x d real symmetric matrix, row-major.
struct CovMatrix {
    std::size_t dim = 0;
    std::vector<double> entries;
    std::vector<std::string> labels;

    double operator()(std::size_t i, std::size_t j) const { return entries[i * dim + j]; }
    double& operator()(std::size_t i, std::size_t j) { return entries[i * dim + j]; }
};

/// Evaluates
///   V_{i,n} = sum over partition schemes (A, B) of (2 pi)^{m-1} times the
///   integral of g_i(lambda) conj(g_n(omega)) prod_j f_{r_j} over
///   A{lambda} = B{omega},
/// by Riemann sums on the grid 2 pi n / N, n in (-N/2, N/2]. Free variables
/// are lambda and the omega coordinates not fixed by the constraints; the
/// rest are solved exactly on the integer grid.
class VarianceEngine {
public:
    explicit VarianceEngine(VarianceRequest request);

    const VarianceRequest& request() const { return req_; }
    std::size_t size() const { return req_.weights.size(); }

    /// Complex V_{i,n} before taking the real part.
    cplx covariance(std::size_t i, std::size_t n) const;
    /// Real part of covariance(); throws ComputationError when the imaginary
    /// part exceeds 1e-6 (1 + |V|) for two symmetric weights.
    double variance(std::size_t i, std::size_t n) const;
    /// All pairs at once; symmetrised and checked for positive
    /// semi-definiteness (eigenvalues >= -1e-8 trace).
    CovMatrix cov_matrix() const;
    /// Complex matrix before symmetrisation, row-major.
    std::vector<cplx> raw_matrix() const;

private:
    struct Grids;
    std::vector<cplx> block(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const;
    bool analytic_pair(std::size_t i, std::size_t n) const;
    cplx analytic_covariance(std::size_t i, std::size_t n) const;

    VarianceRequest req_;
    std::shared_ptr<const Grids> grids_;
};

double variance(const VarianceRequest& request, std::size_t i, std::size_t n);
CovMatrix cov_matrix(const VarianceRequest& request);

/// Exact lintest covariance when g_i, g_n are lintest weights for the filter
/// of `model`: g * Psi is a pure exponential, so each scheme integral is
/// (2 pi)^{2k - m + 1} or 0.
double lintest_covariance(const LinearModel& model, int j1, int k1, int j2, int k2,
                          bool ordered_schemes = false);

/// M_g(f_k) = integral of g f_k over the k-torus by the same Riemann sum.
cplx polyspectral_mean(const WeightFunction& g, const SpectraSource& source, int grid_n = 64);

/// T times the sample covariance of the estimate vector over simulated
/// replicates of `model`. Deterministic in `seed`.
CovMatrix mc_cov_oracle(const ModelSpec& model, const std::vector<WeightFunction>& weights,
                        std::size_t T, std::size_t replicates, std::uint64_t seed,
                        std::size_t burn_in = 500, int threads = 0);

}  // namespace polyspec
