#include "polyspec/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "polyspec/error.hpp"
#include "polyspec/polymean.hpp"
#include "polyspec/simlab.hpp"

namespace polyspec {

PanelResult preprocess_gdp(const std::vector<PanelRow>& rows) {
    PanelResult out;
    for (const auto& row : rows) {
        if (std::any_of(row.values.begin(), row.values.end(), [](double v) { return !std::isfinite(v); })) {
            out.skipped.emplace_back(row.id, "missing values");
            continue;
        }
        if (row.values.size() < 9) {
            out.skipped.emplace_back(row.id, "fewer than 8 observations after differencing");
            continue;
        }
        std::vector<double> d(row.values.size() - 1);
        for (std::size_t t = 0; t + 1 < row.values.size(); ++t) d[t] = row.values[t + 1] - row.values[t];
        const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
        double ss = 0.0;
        for (double v : d) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(d.size()));
        if (!(sd > 1e-12 * (1.0 + std::abs(mean)))) {
            out.skipped.emplace_back(row.id, "zero variance after differencing");
            continue;
        }
        for (auto& v : d) v = (v - mean) / sd;
        out.series.push_back({row.id, TimeSeries(std::move(d))});
    }
    return out;
}

std::vector<PanelRow> read_panel_csv(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<PanelRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (header && lineno == 1) continue;
        auto fields = csv::split_record(line);
        if (fields.size() < 2) throw InputError("panel CSV line " + std::to_string(lineno) + ": expected id and values");
        PanelRow row{fields[0], {}};
        for (std::size_t i = 1; i < fields.size(); ++i) {
            std::string f = fields[i];
            f.erase(std::remove_if(f.begin(), f.end(), [](unsigned char c) { return std::isspace(c); }), f.end());
            double v = 0.0;
            if (f.empty() || f == "NA" || f == "NaN" || f == "nan" || f == "..") {
                v = std::numeric_limits<double>::quiet_NaN();
            } else if (!csv::parse_double(f, v)) {
                throw InputError("panel CSV line " + std::to_string(lineno) + ": not a number: '" + fields[i] + "'");
            }
            row.values.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<WeightFunction> feature_weights() {
    std::vector<WeightFunction> w;
    for (int a = 0; a < 10; ++a) w.push_back(annulus_indicator(0.1 * a, 0.1 * (a + 1)));
    w.push_back(bartlett_weight());
    w.push_back(cosine_product_weight(1.0 / (4.0 * kPi * kPi)));
    return w;
}

FeatureVector extract_features(const TimeSeries& series, const std::vector<WeightFunction>& weights, std::string id,
                               int threads) {
    const auto& w = weights.empty() ? feature_weights() : weights;
    EstimateOptions opts;
    opts.threads = threads;
    FeatureVector fv{std::move(id), {}};
    for (const auto& e : estimate_means(series, w, opts)) fv.features.push_back(e.value.real());
    return fv;
}

std::vector<std::vector<double>> standardize_columns(std::vector<std::vector<double>> rows) {
    if (rows.empty()) return rows;
    const std::size_t d = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != d) throw InputError("feature rows differ in length");
    const double n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0, ss = 0.0;
        for (const auto& r : rows) mean += r[j];
        mean /= n;
        for (const auto& r : rows) ss += (r[j] - mean) * (r[j] - mean);
        const double sd = std::sqrt(ss / n);
        for (auto& r : rows) r[j] = sd > 0.0 ? (r[j] - mean) / sd : 0.0;
    }
    return rows;
}

WcobRatio wcob(const TimeSeries& series, int threads) {
    EstimateOptions opts;
    opts.threads = threads;
    const auto e = estimate_means(series, {wcob_numerator_weight(1), wcob_numerator_weight(2), constant_weight(2, 1.0)}, opts);
    const cplx den = e[2].value;
    if (std::abs(den.real()) < 1e-12) throw ComputationError("WCOB denominator vanishes");
    return {e[0].value.real() / den.real(), e[1].value.real() / den.real(), e[0].value / den, e[1].value / den};
}

namespace {

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

}  // namespace

ClusterAssignment kmeans(const std::vector<std::vector<double>>& points, int K, std::uint64_t seed, int max_iter) {
    const std::size_t n = points.size();
    if (K < 1 || static_cast<std::size_t>(K) > n) throw InputError("K must lie in 1..number of points");
    if (max_iter < 1) throw InputError("max_iter must be >= 1");
    const std::size_t dim = points.front().size();
    for (const auto& p : points)
        if (p.size() != dim) throw InputError("points differ in dimension");

    Rng rng(seed, 0);
    std::vector<std::vector<double>> centers;
    centers.push_back(points[std::min(n - 1, static_cast<std::size_t>(rng.uniform() * n))]);
    std::vector<double> d2(n);
    while (centers.size() < static_cast<std::size_t>(K)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) d2[i] = std::min(d2[i], sqdist(points[i], c));
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (pick = 0; pick + 1 < n; ++pick) {
                if (u < d2[pick]) break;
                u -= d2[pick];
            }
            while (d2[pick] == 0.0) pick = (pick + 1) % n;
        } else {
            pick = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * n));
        }
        centers.push_back(points[pick]);
    }

    ClusterAssignment res;
    std::vector<int> assign(n, -1);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = sqdist(points[i], centers[0]);
            for (int c = 1; c < K; ++c) {
                const double dd = sqdist(points[i], centers[c]);
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            if (assign[i] != best) changed = true;
            assign[i] = best;
            inertia += bd;
        }
        res.inertia_trace.push_back(inertia);
        res.iterations = it + 1;
        if (!changed && it > 0) break;
        std::vector<std::vector<double>> sums(K, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(K, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += points[i][j];
        }
        for (int c = 0; c < K; ++c)
            if (counts[c] > 0)
                for (std::size_t j = 0; j < dim; ++j) centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
    res.centroids = centers;
    res.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res.labels.push_back(assign[i] + 1);
        res.inertia += sqdist(points[i], centers[assign[i]]);
    }
    return res;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw InputError("label vectors differ in length");
    const double n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    double sj = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : joint) sj += c2(v);
    for (const auto& [k, v] : ra) sa += c2(v);
    for (const auto& [k, v] : rb) sb += c2(v);
    const double expected = sa * sb / c2(n);
    const double top = 0.5 * (sa + sb);
    if (top == expected) return 1.0;
    return (sj - expected) / (top - expected);
}

}  // namespace polyspec
