#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "polyspec/asymvar.hpp"
#include "polyspec/error.hpp"
#include "polyspec/features.hpp"
#include "polyspec/lintest.hpp"
#include "polyspec/partitions.hpp"
#include "polyspec/polymean.hpp"
#include "polyspec/simlab.hpp"

namespace py = pybind11;
using namespace polyspec;

namespace {

std::vector<WeightFunction> weights_from(const std::vector<std::string>& labels, int k, const LinearModel* model) {
    std::vector<WeightFunction> w;
    for (const auto& l : labels) w.push_back(parse_weight(l, k, model));
    return w;
}

std::vector<std::vector<double>> rows_of(const CovMatrix& c) {
    std::vector<std::vector<double>> out(c.dim, std::vector<double>(c.dim));
    for (std::size_t i = 0; i < c.dim; ++i)
        for (std::size_t j = 0; j < c.dim; ++j) out[i][j] = c(i, j);
    return out;
}

}  // namespace

PYBIND11_MODULE(_polyspec, m) {
    m.doc() = "Polyspectral means, their asymptotic variances and the bispectral linearity test";

    auto input = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<UnsupportedOrderError>(m, "UnsupportedOrderError", input.ptr());
    auto computation = py::register_exception<ComputationError>(m, "ComputationError", PyExc_RuntimeError);
    py::register_exception<SingularFilterError>(m, "SingularFilterError", computation.ptr());

    m.def(
        "estimate_means",
        [](const std::vector<double>& x, const std::vector<std::string>& weights, int k, bool center, int threads) {
            EstimateOptions opts;
            opts.auto_center = center;
            opts.threads = threads;
            std::vector<cplx> out;
            for (const auto& e : estimate_means(TimeSeries(x), weights_from(weights, k, nullptr), opts)) out.push_back(e.value);
            return out;
        },
        py::arg("x"), py::arg("weights"), py::arg("k") = 0, py::arg("center") = true, py::arg("threads") = 0,
        "Polyspectral mean estimates for catalog weight labels such as 'cosprod' or 'lag:h1=1,h2=0'.");

    m.def(
        "cov_matrix",
        [](const std::string& model, const std::vector<std::string>& weights, int k, int grid_n, bool ordered,
           int threads) {
            const ModelSpec spec = parse_model(model);
            VarianceRequest r;
            r.k = k;
            r.weights = weights_from(weights, k, spec.linear ? &*spec.linear : nullptr);
            r.source = spectra_source(spec, k);
            r.grid_n = grid_n;
            r.ordered_schemes = ordered;
            r.threads = threads;
            return rows_of(cov_matrix(r));
        },
        py::arg("model"), py::arg("weights"), py::arg("k") = 2, py::arg("grid_n") = 64, py::arg("ordered_schemes") = false,
        py::arg("threads") = 0, "Asymptotic covariance matrix of the polyspectral means.");

    m.def(
        "simulate",
        [](const std::string& model, std::size_t T, std::uint64_t seed, std::size_t replicate, std::size_t burn_in) {
            auto x = simulate(SimSpec{model, T, replicate + 1, seed, burn_in}, replicate);
            return std::vector<double>(x.values().begin(), x.values().end());
        },
        py::arg("model"), py::arg("T"), py::arg("seed") = 42, py::arg("replicate") = 0, py::arg("burn_in") = 500);

    m.def(
        "lintest",
        [](const std::vector<double>& x, const std::string& model, int M, const std::string& pvalue, std::size_t draws,
           std::uint64_t seed) {
            LinTestConfig cfg;
            const auto spec = parse_model(model);
            if (!spec.linear) throw InputError("model '" + model + "' is not linear");
            cfg.model = *spec.linear;
            cfg.M = M;
            cfg.pvalue_method = parse_pvalue_method(pvalue);
            cfg.mc_draws = draws;
            cfg.seed = seed;
            auto r = blt_statistic(TimeSeries(x), cfg);
            py::dict d;
            d["statistic"] = r.statistic;
            d["pvalue"] = r.pvalue;
            d["T"] = r.T;
            d["M"] = r.M;
            d["eigenvalues"] = r.eigenvalues;
            d["cumulants"] = r.cumulants;
            d["warnings"] = r.warnings;
            return d;
        },
        py::arg("x"), py::arg("model"), py::arg("M") = 10, py::arg("pvalue") = "montecarlo", py::arg("draws") = 200000,
        py::arg("seed") = 42, "Bispectral linearity test against a known linear filter.");

    m.def("weighted_chisq_pvalue",
          [](double x, std::vector<double> nu, const std::string& method, std::size_t draws, std::uint64_t seed) {
              return weighted_chisq_pvalue(x, std::move(nu), parse_pvalue_method(method), draws, seed);
          },
          py::arg("x"), py::arg("nu"), py::arg("method") = "imhof", py::arg("draws") = 200000, py::arg("seed") = 42);

    m.def("partition_count", [](int k, int m, bool ordered) { return partition_schemes(k, m, ordered).size(); },
          py::arg("k"), py::arg("m"), py::arg("ordered") = false);

    m.def(
        "features",
        [](const std::vector<double>& x, int threads) { return extract_features(TimeSeries(x), {}, "", threads).features; },
        py::arg("x"), py::arg("threads") = 0, "Twelve bispectral features of a preprocessed series.");

    m.def(
        "kmeans",
        [](const std::vector<std::vector<double>>& points, int K, std::uint64_t seed) { return kmeans(points, K, seed).labels; },
        py::arg("points"), py::arg("K"), py::arg("seed") = 42);

    m.def("adjusted_rand_index", &adjusted_rand_index, py::arg("a"), py::arg("b"));
}
