#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "polyspec/lintest.hpp"
#include "polyspec/models.hpp"
#include "polyspec/series.hpp"
#include "polyspec/weights.hpp"

namespace polyspec {

/// SplitMix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);
/// Seed of replicate `stream` under master seed `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

/// mt19937_64 with documented samplers:
///   uniform  (bits >> 11) * 2^-53 in [0, 1)
///   normal   Box-Muller, both outputs used
///   Exp(1)-1 inverse CDF, -log(1 - u) - 1
///   chi2_4-4 sum of four squared normals, minus 4
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    double uniform();
    double normal();
    double innovation(Innovation innov);
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct SimSpec {
    std::string model;
    std::size_t T = 100;
    std::size_t replicates = 1;
    std::uint64_t seed = 42;
    std::size_t burn_in = 500;
};

/// One path of length T after discarding `burn_in` values. Throws InputError
/// when an AR model is given fewer than 200 burn-in steps.
TimeSeries simulate(const ModelSpec& model, std::size_t T, Rng& rng, std::size_t burn_in = 500);
/// Replicate `replicate` of `spec`, drawn from its own substream.
TimeSeries simulate(const SimSpec& spec, std::size_t replicate = 0);

struct MseEntry {
    std::string model;
    std::string weight;
    double V;          // asymptotic variance
    double mean_vhat;  // average of the T * sample variances
    double mse;        // mean of (Vhat - V)^2 over outer replicates
    double scaled_mse; // mean of (Vhat / V - 1)^2
};

struct MseReport {
    std::size_t T;
    std::size_t reps;
    std::size_t outer_reps;
    std::uint64_t seed;
    std::vector<MseEntry> entries;
};

struct MseConfig {
    std::vector<std::string> models;
    std::vector<WeightFunction> weights;
    std::size_t T = 100;
    std::size_t reps = 1000;
    std::size_t outer_reps = 50;
    std::uint64_t seed = 42;
    int grid_n = 64;
    std::size_t burn_in = 500;
    int threads = 0;
};

/// For every (model, weight): Vhat_i = T * sample variance of `reps`
/// estimates, repeated `outer_reps` times, compared with the asymptotic V.
MseReport mse_experiment(const MseConfig& cfg);

struct PowerConfig {
    std::vector<double> thetas{0.0, 2.5, 5.0, 7.5, 10.0};
    std::size_t T = 100;
    std::size_t reps = 300;
    double level = 0.05;
    int M = 10;
    std::uint64_t seed = 42;
    std::size_t burn_in = 500;
    /// H0 filter used by the test; the quadratic-MA data are MA(1) at theta=0.
    std::string null_model = "ma1:theta=0.4";
    PvalueMethod method = PvalueMethod::Imhof;
    std::size_t mc_draws = 20000;
    int threads = 0;
};

struct PowerPoint {
    double theta;
    std::size_t rejections;
    std::size_t reps;
    double rate;
};

/// Rejection frequency of the linearity test on quadratic-MA data.
std::vector<PowerPoint> power_curve(const PowerConfig& cfg);

}  // namespace polyspec
