#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polyspec/series.hpp"
#include "polyspec/weights.hpp"

namespace polyspec {

struct NamedSeries {
    std::string id;
    TimeSeries series;
};

struct PanelResult {
    std::vector<NamedSeries> series;
    /// (id, reason) for every dropped row.
    std::vector<std::pair<std::string, std::string>> skipped;
};

/// Row of raw levels; NaN marks a missing value.
struct PanelRow {
    std::string id;
    std::vector<double> values;
};

/// First differences, then zero mean and unit variance. Rows with missing
/// values, fewer than 8 differences or zero variance are skipped.
PanelResult preprocess_gdp(const std::vector<PanelRow>& rows);

/// Wide CSV: first column id, remaining columns one value per period. Empty
/// cells and NA count as missing. The first row is a header unless `header`
/// is false.
std::vector<PanelRow> read_panel_csv(const std::string& path, bool header = true);

/// 10 annuli (0.1 k, 0.1 (k+1)] in squared radius, Bartlett, and the cosine
/// product scaled by (2 pi)^{-2}.
std::vector<WeightFunction> feature_weights();

struct FeatureVector {
    std::string id;
    std::vector<double> features;
};

/// Real parts of the bispectral means for `weights` (default feature_weights()).
FeatureVector extract_features(const TimeSeries& series, const std::vector<WeightFunction>& weights,
                               std::string id = "", int threads = 0);

/// Column z-scores; constant columns become zero.
std::vector<std::vector<double>> standardize_columns(std::vector<std::vector<double>> rows);

struct WcobRatio {
    double c1;
    double c2;
    cplx c1_complex;
    cplx c2_complex;
};

/// Means with weights lambda_1 and lambda_2 over the mean with constant
/// weight 1, from real parts. Throws ComputationError when the denominator
/// is below 1e-12 in absolute value.
WcobRatio wcob(const TimeSeries& series, int threads = 0);

struct ClusterAssignment {
    std::vector<int> labels;  // 1..K
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_trace;  // after each assignment step
};

/// k-means++ seeding followed by Lloyd iterations until assignments settle.
ClusterAssignment kmeans(const std::vector<std::vector<double>>& points, int K, std::uint64_t seed,
                         int max_iter = 300);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace polyspec
