// polyspec command-line tool.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "polyspec/asymvar.hpp"
#include "polyspec/error.hpp"
#include "polyspec/features.hpp"
#include "polyspec/lintest.hpp"
#include "polyspec/partitions.hpp"
#include "polyspec/polymean.hpp"
#include "polyspec/simlab.hpp"

using json = nlohmann::ordered_json;
using namespace polyspec;

namespace {

constexpr const char* kSchema = "polyspec/1";

struct Common {
    std::string out;
    std::string format = "json";
    int threads = 0;
};

void add_common(CLI::App* app, Common& c, bool csv_allowed) {
    app->add_option("--out", c.out, "Write output to this file instead of stdout");
    app->add_option("--threads", c.threads, "Worker threads (default: POLYSPEC_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    if (csv_allowed)
        app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw InputError("cannot write " + c.out);
    f << text;
}

std::string dump(json j) { return j.dump(2) + "\n"; }

json header(const std::string& command) { return json{{"schema", kSchema}, {"command", command}}; }

std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

std::vector<WeightFunction> parse_weights(const std::vector<std::string>& labels, int k, const LinearModel* model) {
    if (labels.empty()) throw InputError("at least one --weight is required");
    std::vector<WeightFunction> w;
    for (const auto& l : labels) w.push_back(parse_weight(l, k, model));
    return w;
}

std::vector<std::string> table1_weights() {
    return {"cosprod", "band:a1=-0.2,b1=0.2,a2=-0.5,b2=0.5", "cone"};
}

json matrix_json(const CovMatrix& c) {
    json rows = json::array();
    for (std::size_t i = 0; i < c.dim; ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < c.dim; ++j) r.push_back(c(i, j));
        rows.push_back(r);
    }
    return rows;
}

LinearModel linear_or_throw(const ModelSpec& m) {
    if (!m.linear) throw InputError("model '" + m.label + "' is not linear");
    return *m.linear;
}

std::array<double, 5> parse_cumulants(const std::vector<double>& v) {
    if (v.size() != 5) throw InputError("--cumulants takes kappa_2..kappa_6 (five values)");
    return {v[0], v[1], v[2], v[3], v[4]};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polyspectral means, asymptotic variances and the bispectral linearity test"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("polyspec ") + kSchema);

    // estimate
    Common est_c;
    std::string est_input, est_model;
    std::vector<std::string> est_weights;
    int est_k = 0, est_grid = 64;
    bool est_no_center = false;
    auto* est = app.add_subcommand("estimate", "Polyspectral mean estimates of a series");
    est->add_option("--input", est_input, "Series CSV (last column used)")->required();
    est->add_option("--weight", est_weights, "Weight label, repeatable")->required();
    est->add_option("--k", est_k, "Order (defaults to the weight's order)");
    est->add_option("--model", est_model, "Model for standard errors sqrt(V / T)");
    est->add_option("--grid-n", est_grid, "Grid points per dimension for V");
    est->add_flag("--no-center", est_no_center, "Do not subtract the sample mean");
    add_common(est, est_c, true);

    // variance
    Common var_c;
    std::string var_model;
    std::vector<std::string> var_weights;
    int var_k = 2, var_grid = 64;
    bool var_ordered = false;
    auto* var = app.add_subcommand("variance", "Asymptotic covariance matrix of polyspectral means");
    var->add_option("--model", var_model, "Model spec")->required();
    var->add_option("--weight", var_weights, "Weight label, repeatable")->required();
    var->add_option("--k", var_k, "Order (1 or 2)");
    var->add_option("--grid-n", var_grid, "Grid points per dimension");
    var->add_flag("--ordered-schemes", var_ordered, "Sum over ordered partition pairs");
    add_common(var, var_c, false);

    // lintest
    Common lt_c;
    std::string lt_input, lt_model, lt_pvalue = "montecarlo";
    int lt_M = 10;
    std::size_t lt_draws = 200000;
    std::uint64_t lt_seed = 42;
    std::vector<double> lt_cumulants;
    auto* lt = app.add_subcommand("lintest", "Bispectral linearity test against a known linear filter");
    lt->add_option("--input", lt_input, "Series CSV")->required();
    lt->add_option("--model", lt_model, "Null model, e.g. ar1:phi=0.976")->required();
    lt->add_option("--M", lt_M, "Lag cap")->check(CLI::PositiveNumber);
    lt->add_option("--pvalue", lt_pvalue, "P-value method")->check(CLI::IsMember({"montecarlo", "imhof"}));
    lt->add_option("--draws", lt_draws, "Monte Carlo draws");
    lt->add_option("--seed", lt_seed, "Seed for Monte Carlo p-values");
    lt->add_option("--cumulants", lt_cumulants, "kappa_2..kappa_6 override")->expected(5)->delimiter(',');
    add_common(lt, lt_c, false);

    // simulate
    Common sim_c;
    SimSpec sim_spec;
    auto* sim = app.add_subcommand("simulate", "Simulate series from a named model");
    sim->add_option("--model", sim_spec.model, "Model spec")->required();
    sim->add_option("--T", sim_spec.T, "Length")->check(CLI::PositiveNumber);
    sim->add_option("--replicates", sim_spec.replicates, "Number of paths")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_spec.seed, "Master seed");
    sim->add_option("--burn-in", sim_spec.burn_in, "Discarded warm-up values");
    sim_c.format = "csv";
    add_common(sim, sim_c, true);

    // mse-table
    Common mse_c;
    MseConfig mse_cfg;
    std::vector<std::string> mse_weights;
    auto* mse = app.add_subcommand("mse-table", "MSE of the Monte Carlo variance estimate");
    mse->add_option("--model", mse_cfg.models, "Model spec, repeatable")->required();
    mse->add_option("--weight", mse_weights, "Weight label, repeatable (default: the three Table 1 weights)");
    mse->add_option("--T", mse_cfg.T, "Series length");
    mse->add_option("--reps", mse_cfg.reps, "Inner replicates");
    mse->add_option("--outer-reps", mse_cfg.outer_reps, "Outer replicates");
    mse->add_option("--seed", mse_cfg.seed, "Master seed");
    mse->add_option("--grid-n", mse_cfg.grid_n, "Grid points per dimension for V");
    mse->add_option("--burn-in", mse_cfg.burn_in, "Discarded warm-up values");
    add_common(mse, mse_c, true);

    // power-curve
    Common pw_c;
    PowerConfig pw_cfg;
    std::string pw_pvalue = "imhof";
    auto* pw = app.add_subcommand("power-curve", "Rejection rate of the linearity test on quadratic-MA data");
    pw->add_option("--theta", pw_cfg.thetas, "Theta values")->delimiter(',');
    pw->add_option("--T", pw_cfg.T, "Series length");
    pw->add_option("--reps", pw_cfg.reps, "Replicates per theta");
    pw->add_option("--level", pw_cfg.level, "Nominal level");
    pw->add_option("--M", pw_cfg.M, "Lag cap")->check(CLI::PositiveNumber);
    pw->add_option("--seed", pw_cfg.seed, "Master seed");
    pw->add_option("--null-model", pw_cfg.null_model, "Linear filter under H0");
    pw->add_option("--pvalue", pw_pvalue, "P-value method")->check(CLI::IsMember({"montecarlo", "imhof"}));
    pw->add_option("--draws", pw_cfg.mc_draws, "Monte Carlo draws per test");
    add_common(pw, pw_c, true);

    // cluster
    Common cl_c;
    std::string cl_input, cl_centroids;
    int cl_k = 5, cl_iter = 300;
    std::uint64_t cl_seed = 42;
    bool cl_standardize = false;
    auto* cl = app.add_subcommand("cluster", "Bispectral features and k-means on a wide panel CSV");
    cl->add_option("--input", cl_input, "Panel CSV: id, then one level per period")->required();
    cl->add_option("--k", cl_k, "Number of clusters")->check(CLI::PositiveNumber);
    cl->add_option("--seed", cl_seed, "Seed for k-means++");
    cl->add_option("--max-iter", cl_iter, "Lloyd iteration cap");
    cl->add_option("--centroids", cl_centroids, "Also write centroids as JSON to this file");
    cl->add_flag("--standardize", cl_standardize, "z-score each feature before clustering");
    add_common(cl, cl_c, true);

    // partitions dump
    Common pt_c;
    int pt_k = 2, pt_m = 0;
    bool pt_ordered = false;
    auto* pt = app.add_subcommand("partitions", "Partition schemes of the variance formula");
    pt->require_subcommand(1);
    auto* ptd = pt->add_subcommand("dump", "List the schemes");
    ptd->add_option("--k", pt_k, "Order")->check(CLI::Range(1, 4));
    ptd->add_option("--m", pt_m, "Only this number of blocks");
    ptd->add_flag("--ordered", pt_ordered, "Ordered (A, B) pairs");
    add_common(ptd, pt_c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "polyspec: E_USAGE: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*est) {
            TimeSeries x = read_series_csv(est_input);
            auto weights = parse_weights(est_weights, est_k, nullptr);
            EstimateOptions opts;
            opts.auto_center = !est_no_center;
            opts.threads = est_c.threads;
            auto res = estimate_means(x, weights, opts);
            if (!est_model.empty()) {
                const int k = res.front().k;
                VarianceRequest req;
                req.k = k;
                req.weights = weights;
                req.source = spectra_source(parse_model(est_model), k);
                req.grid_n = est_grid;
                req.threads = est_c.threads;
                VarianceEngine eng(req);
                for (std::size_t i = 0; i < res.size(); ++i)
                    res[i].stderr_ = std::sqrt(std::max(0.0, eng.variance(i, i)) / static_cast<double>(x.size()));
            }
            if (est_c.format == "csv") {
                std::string s = "weight,k,T,value,imag,stderr\n";
                for (const auto& r : res)
                    s += "\"" + r.weight_label + "\"," + std::to_string(r.k) + "," + std::to_string(r.T) + "," +
                         num(r.value.real()) + "," + num(r.value.imag()) + "," + (r.stderr_ ? num(*r.stderr_) : "") + "\n";
                emit(est_c, s);
            } else {
                json j = header("estimate");
                j["T"] = x.size();
                j["k"] = res.front().k;
                j["centered"] = !est_no_center;
                json arr = json::array();
                for (const auto& r : res) {
                    json e{{"weight", r.weight_label}, {"value", r.value.real()}, {"imag", r.value.imag()}};
                    if (r.stderr_) e["stderr"] = *r.stderr_;
                    arr.push_back(e);
                }
                j["estimates"] = arr;
                emit(est_c, dump(j));
            }
        } else if (*var) {
            const ModelSpec model = parse_model(var_model);
            VarianceRequest req;
            req.k = var_k;
            req.weights = parse_weights(var_weights, var_k, model.linear ? &*model.linear : nullptr);
            req.source = spectra_source(model, var_k);
            req.grid_n = var_grid;
            req.ordered_schemes = var_ordered;
            req.threads = var_c.threads;
            auto c = cov_matrix(req);
            json j = header("variance");
            j["model"] = model.label;
            j["weights"] = c.labels;
            j["k"] = var_k;
            j["grid_n"] = var_grid;
            j["ordered_schemes"] = var_ordered;
            j["matrix"] = matrix_json(c);
            emit(var_c, dump(j));
        } else if (*lt) {
            TimeSeries x = read_series_csv(lt_input);
            LinTestConfig cfg;
            cfg.model = linear_or_throw(parse_model(lt_model));
            cfg.M = lt_M;
            cfg.pvalue_method = parse_pvalue_method(lt_pvalue);
            cfg.mc_draws = lt_draws;
            cfg.seed = lt_seed;
            cfg.threads = lt_c.threads;
            if (!lt_cumulants.empty()) cfg.cumulants = parse_cumulants(lt_cumulants);
            auto r = blt_statistic(x, cfg);
            for (const auto& w : r.warnings) std::cerr << "polyspec: warning: " << w << "\n";
            json j = header("lintest");
            j["model"] = lt_model;
            j["T"] = r.T;
            j["M"] = r.M;
            j["statistic"] = r.statistic;
            j["pvalue"] = r.pvalue;
            j["pvalue_method"] = to_string(cfg.pvalue_method);
            j["cumulants"] = r.cumulants;
            json terms = json::array();
            for (const auto& t : r.per_term)
                terms.push_back({{"j", t.j}, {"k", t.k}, {"estimate", t.estimate.real()}, {"imag", t.estimate.imag()},
                                 {"variance", t.variance}, {"contribution", t.contribution}});
            j["per_term"] = terms;
            j["eigenvalues"] = r.eigenvalues;
            emit(lt_c, dump(j));
        } else if (*sim) {
            std::vector<TimeSeries> paths;
            for (std::size_t r = 0; r < sim_spec.replicates; ++r) paths.push_back(simulate(sim_spec, r));
            if (sim_c.format == "csv") {
                std::string s = "replicate,t,value\n";
                for (std::size_t r = 0; r < paths.size(); ++r)
                    for (std::size_t t = 0; t < paths[r].size(); ++t)
                        s += std::to_string(r) + "," + std::to_string(t + 1) + "," + num(paths[r][t]) + "\n";
                emit(sim_c, s);
            } else {
                json j = header("simulate");
                j["model"] = sim_spec.model;
                j["T"] = sim_spec.T;
                j["seed"] = sim_spec.seed;
                j["burn_in"] = sim_spec.burn_in;
                json arr = json::array();
                for (const auto& p : paths) arr.push_back(std::vector<double>(p.values().begin(), p.values().end()));
                j["series"] = arr;
                emit(sim_c, dump(j));
            }
        } else if (*mse) {
            mse_cfg.weights = parse_weights(mse_weights.empty() ? table1_weights() : mse_weights, 2, nullptr);
            mse_cfg.threads = mse_c.threads;
            auto rep = mse_experiment(mse_cfg);
            if (mse_c.format == "csv") {
                std::string s = "model,weight,V,mean_vhat,mse,scaled_mse\n";
                for (const auto& e : rep.entries)
                    s += e.model + ",\"" + e.weight + "\"," + num(e.V) + "," + num(e.mean_vhat) + "," + num(e.mse) + "," +
                         num(e.scaled_mse) + "\n";
                emit(mse_c, s);
            } else {
                json j = header("mse-table");
                j["T"] = rep.T;
                j["reps"] = rep.reps;
                j["outer_reps"] = rep.outer_reps;
                j["seed"] = rep.seed;
                json arr = json::array();
                for (const auto& e : rep.entries)
                    arr.push_back({{"model", e.model}, {"weight", e.weight}, {"V", e.V}, {"mean_vhat", e.mean_vhat},
                                   {"mse", e.mse}, {"scaled_mse", e.scaled_mse}});
                j["entries"] = arr;
                emit(mse_c, dump(j));
            }
        } else if (*pw) {
            pw_cfg.method = parse_pvalue_method(pw_pvalue);
            pw_cfg.threads = pw_c.threads;
            auto pts = power_curve(pw_cfg);
            if (pw_c.format == "csv") {
                std::string s = "theta,rejections,reps,rate\n";
                for (const auto& p : pts)
                    s += num(p.theta) + "," + std::to_string(p.rejections) + "," + std::to_string(p.reps) + "," + num(p.rate) + "\n";
                emit(pw_c, s);
            } else {
                json j = header("power-curve");
                j["T"] = pw_cfg.T;
                j["M"] = pw_cfg.M;
                j["level"] = pw_cfg.level;
                j["seed"] = pw_cfg.seed;
                j["null_model"] = pw_cfg.null_model;
                json arr = json::array();
                for (const auto& p : pts)
                    arr.push_back({{"theta", p.theta}, {"rejections", p.rejections}, {"reps", p.reps}, {"rate", p.rate}});
                j["points"] = arr;
                emit(pw_c, dump(j));
            }
        } else if (*cl) {
            auto panel = preprocess_gdp(read_panel_csv(cl_input));
            for (const auto& [id, why] : panel.skipped) std::cerr << "polyspec: warning: skipped " << id << ": " << why << "\n";
            if (panel.series.empty()) throw InputError("no usable series in " + cl_input);
            std::vector<std::vector<double>> feats;
            for (const auto& s : panel.series) feats.push_back(extract_features(s.series, {}, s.id, cl_c.threads).features);
            auto points = cl_standardize ? standardize_columns(feats) : feats;
            auto res = kmeans(points, cl_k, cl_seed, cl_iter);
            json cj = header("cluster");
            cj["k"] = cl_k;
            cj["seed"] = cl_seed;
            cj["inertia"] = res.inertia;
            cj["iterations"] = res.iterations;
            cj["centroids"] = res.centroids;
            if (!cl_centroids.empty()) {
                std::ofstream f(cl_centroids);
                if (!f) throw InputError("cannot write " + cl_centroids);
                f << dump(cj);
            }
            if (cl_c.format == "csv") {
                std::string s = "id,cluster\n";
                for (std::size_t i = 0; i < panel.series.size(); ++i)
                    s += panel.series[i].id + "," + std::to_string(res.labels[i]) + "\n";
                emit(cl_c, s);
            } else {
                json arr = json::array();
                for (std::size_t i = 0; i < panel.series.size(); ++i)
                    arr.push_back({{"id", panel.series[i].id}, {"cluster", res.labels[i]}, {"features", feats[i]}});
                cj["assignments"] = arr;
                json sk = json::array();
                for (const auto& [id, why] : panel.skipped) sk.push_back({{"id", id}, {"reason", why}});
                cj["skipped"] = sk;
                emit(cl_c, dump(cj));
            }
        } else if (*ptd) {
            json j = header("partitions");
            j["k"] = pt_k;
            j["ordered"] = pt_ordered;
            json arr = json::array();
            for (int m = 1; m <= pt_k + 1; ++m) {
                if (pt_m && m != pt_m) continue;
                for (const auto& s : partition_schemes(pt_k, m, pt_ordered))
                    arr.push_back({{"m", s.m}, {"A", to_string(s.A)}, {"B", to_string(s.B)}, {"block_orders", s.block_orders}});
            }
            j["count"] = arr.size();
            j["schemes"] = arr;
            emit(pt_c, dump(j));
        }
    } catch (const UnsupportedOrderError& e) {
        std::cerr << "polyspec: E_UNSUPPORTED_ORDER: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "polyspec: E_INPUT: " << e.what() << "\n";
        return 2;
    } catch (const SingularFilterError& e) {
        std::cerr << "polyspec: E_SINGULAR_FILTER: " << e.what() << "\n";
        return 1;
    } catch (const ComputationError& e) {
        std::cerr << "polyspec: E_COMPUTATION: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "polyspec: E_INTERNAL: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
