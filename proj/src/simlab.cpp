#include "polyspec/simlab.hpp"

#include <cmath>

#include "polyspec/asymvar.hpp"
#include "polyspec/error.hpp"
#include "polyspec/parallel.hpp"
#include "polyspec/polymean.hpp"

namespace polyspec {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : gen_(substream_seed(seed, stream)) {}

double Rng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

double Rng::innovation(Innovation innov) {
    switch (innov) {
        case Innovation::Exp1m1:
            return -std::log1p(-uniform()) - 1.0;
        case Innovation::ChiSq4m4: {
            double s = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double z = normal();
                s += z * z;
            }
            return s - 4.0;
        }
        case Innovation::Gauss01:
            return normal();
    }
    throw InputError("unknown innovation law");
}

TimeSeries simulate(const ModelSpec& model, std::size_t T, Rng& rng, std::size_t burn_in) {
    if (T == 0) throw InputError("simulate: T must be positive");
    std::vector<double> out(T);
    if (model.linear) {
        const auto& ar = model.linear->ar();
        const auto& ma = model.linear->ma();
        if (!ar.empty() && burn_in < 200) throw InputError("AR models need a burn-in of at least 200");
        const std::size_t n = T + burn_in;
        std::vector<double> x(n, 0.0), e(n);
        for (std::size_t t = 0; t < n; ++t) {
            e[t] = rng.innovation(model.innovation);
            double v = e[t];
            for (std::size_t i = 0; i < ma.size() && i < t; ++i) v += ma[i] * e[t - 1 - i];
            for (std::size_t i = 0; i < ar.size() && i < t; ++i) v += ar[i] * x[t - 1 - i];
            x[t] = v;
        }
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(burn_in), x.end(), out.begin());
    } else if (model.polynomial) {
        const auto& p = *model.polynomial;
        const std::size_t mem = static_cast<std::size_t>(p.memory());
        const std::size_t n = T + burn_in;
        std::vector<double> e(n);
        for (auto& v : e) v = rng.innovation(p.innovation());
        std::vector<double> window(mem + 1);
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t now = burn_in + t;
            for (std::size_t lag = 0; lag <= mem; ++lag) window[lag] = lag <= now ? e[now - lag] : 0.0;
            out[t] = p.evaluate(window);
        }
    } else {
        throw InputError("model has neither a linear nor a polynomial form");
    }
    return TimeSeries(std::move(out));
}

TimeSeries simulate(const SimSpec& spec, std::size_t replicate) {
    if (spec.replicates == 0) throw InputError("replicates must be >= 1");
    Rng rng(spec.seed, replicate);
    return simulate(parse_model(spec.model), spec.T, rng, spec.burn_in);
}

MseReport mse_experiment(const MseConfig& cfg) {
    if (cfg.models.empty() || cfg.weights.empty()) throw InputError("mse_experiment needs models and weights");
    if (cfg.reps < 2 || cfg.outer_reps < 1) throw InputError("mse_experiment needs reps >= 2 and outer_reps >= 1");
    const int k = cfg.weights.front().order();
    const std::size_t d = cfg.weights.size();
    GridEstimator est(cfg.T, k, cfg.weights);

    MseReport report{cfg.T, cfg.reps, cfg.outer_reps, cfg.seed, {}};
    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        const ModelSpec model = parse_model(cfg.models[mi]);
        VarianceRequest req;
        req.k = k;
        req.weights = cfg.weights;
        req.source = spectra_source(model, k);
        req.grid_n = cfg.grid_n;
        req.threads = cfg.threads;
        const auto raw = VarianceEngine(req).raw_matrix();
        const std::uint64_t model_seed = splitmix64(cfg.seed + mi);

        std::vector<double> vhat(cfg.outer_reps * d);
        guarded_chunks(cfg.outer_reps, cfg.threads, [&](std::size_t o) {
            std::vector<double> sum(d, 0.0), sq(d, 0.0);
            for (std::size_t r = 0; r < cfg.reps; ++r) {
                Rng rng(model_seed, o * cfg.reps + r);
                const auto e = est.estimate(simulate(model, cfg.T, rng, cfg.burn_in));
                for (std::size_t i = 0; i < d; ++i) {
                    sum[i] += e[i].real();
                    sq[i] += e[i].real() * e[i].real();
                }
            }
            const double n = static_cast<double>(cfg.reps);
            for (std::size_t i = 0; i < d; ++i) {
                const double var = std::max(0.0, (sq[i] - sum[i] * sum[i] / n) / (n - 1.0));
                vhat[o * d + i] = static_cast<double>(cfg.T) * var;
            }
        });

        for (std::size_t i = 0; i < d; ++i) {
            MseEntry e{model.label, cfg.weights[i].label(), raw[i * d + i].real(), 0.0, 0.0, 0.0};
            for (std::size_t o = 0; o < cfg.outer_reps; ++o) {
                const double v = vhat[o * d + i];
                e.mean_vhat += v;
                e.mse += (v - e.V) * (v - e.V);
                e.scaled_mse += e.V != 0.0 ? (v / e.V - 1.0) * (v / e.V - 1.0) : 0.0;
            }
            const double n = static_cast<double>(cfg.outer_reps);
            e.mean_vhat /= n;
            e.mse /= n;
            e.scaled_mse /= n;
            report.entries.push_back(e);
        }
    }
    return report;
}

std::vector<PowerPoint> power_curve(const PowerConfig& cfg) {
    if (cfg.thetas.empty() || cfg.reps == 0) throw InputError("power_curve needs thetas and reps >= 1");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw InputError("level must lie in (0, 1)");
    const ModelSpec null_spec = parse_model(cfg.null_model);
    if (!null_spec.linear) throw InputError("the null model must be linear");

    std::vector<PowerPoint> out;
    for (std::size_t ti = 0; ti < cfg.thetas.size(); ++ti) {
        ModelSpec data;
        data.label = "quadma";
        data.polynomial = quadma_process(cfg.thetas[ti]);
        data.innovation = Innovation::Gauss01;
        std::vector<int> reject(cfg.reps, 0);
        const std::uint64_t theta_seed = splitmix64(cfg.seed + ti);
        guarded_chunks(cfg.reps, cfg.threads, [&](std::size_t r) {
            Rng rng(theta_seed, r);
            const TimeSeries x = simulate(data, cfg.T, rng, cfg.burn_in);
            LinTestConfig lc;
            lc.M = cfg.M;
            lc.model = *null_spec.linear;
            lc.pvalue_method = cfg.method;
            lc.mc_draws = cfg.mc_draws;
            lc.seed = substream_seed(theta_seed, r);
            lc.threads = 1;
            reject[r] = blt_statistic(x, lc).pvalue < cfg.level ? 1 : 0;
        });
        std::size_t hits = 0;
        for (int v : reject) hits += static_cast<std::size_t>(v);
        out.push_back({cfg.thetas[ti], hits, cfg.reps, static_cast<double>(hits) / static_cast<double>(cfg.reps)});
    }
    return out;
}

}  // namespace polyspec
