#include "polyspec/models.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "polyspec/detail/params.hpp"
#include "polyspec/error.hpp"
#include "polyspec/partitions.hpp"

namespace polyspec {

Innovation parse_innovation(std::string_view tag) {
    if (tag == "exp1m1" || tag == "exp") return Innovation::Exp1m1;
    if (tag == "chisq4m4" || tag == "chisq") return Innovation::ChiSq4m4;
    if (tag == "gauss01" || tag == "gauss") return Innovation::Gauss01;
    throw InputError("unknown innovation distribution '" + std::string(tag) + "'");
}

std::string to_string(Innovation innov) {
    switch (innov) {
        case Innovation::Exp1m1: return "exp1m1";
        case Innovation::ChiSq4m4: return "chisq4m4";
        case Innovation::Gauss01: return "gauss01";
    }
    return "?";
}

double innovation_cumulant(Innovation innov, int r) {
    if (r < 1) throw InputError("cumulant order must be >= 1");
    if (r == 1) return 0.0;
    double fact = std::tgamma(static_cast<double>(r));  // (r-1)!
    switch (innov) {
        case Innovation::Exp1m1: return fact;
        case Innovation::ChiSq4m4: return 4.0 * std::ldexp(1.0, r - 1) * fact;
        case Innovation::Gauss01: return r == 2 ? 1.0 : 0.0;
    }
    return 0.0;
}

std::array<double, 5> innovation_cumulants(Innovation innov) {
    std::array<double, 5> out{};
    for (int r = 2; r <= 6; ++r) out[r - 2] = innovation_cumulant(innov, r);
    return out;
}

namespace {

double binom(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

std::vector<double> moments_from_cumulants(const std::vector<double>& kappa, int max_order) {
    // kappa[j] = j-th cumulant, kappa[0] unused
    std::vector<double> m(max_order + 1, 0.0);
    m[0] = 1.0;
    for (int n = 1; n <= max_order; ++n) {
        double acc = 0.0;
        for (int j = 1; j <= n; ++j) acc += binom(n - 1, j - 1) * kappa[j] * m[n - j];
        m[n] = acc;
    }
    return m;
}

void check_causal(const std::vector<double>& ar) {
    for (double a : ar)
        if (!std::isfinite(a)) throw InputError("AR coefficient is not finite");
    const int p = static_cast<int>(ar.size());
    if (p == 0) return;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) comp(0, i) = ar[i];
    for (int i = 1; i < p; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (int i = 0; i < p; ++i) {
        // eigenvalues are reciprocals of the roots of phi(z)
        double w = std::abs(es.eigenvalues()[i]);
        if (w * (1.0 + 1e-9) >= 1.0)
            throw InputError("AR polynomial has a root on or inside the unit circle");
    }
}

}  // namespace

std::vector<double> innovation_moments(Innovation innov, int max_order) {
    std::vector<double> kappa(max_order + 1, 0.0);
    for (int r = 1; r <= max_order; ++r) kappa[r] = innovation_cumulant(innov, r);
    return moments_from_cumulants(kappa, max_order);
}

LinearModel::LinearModel(std::vector<double> ar, std::vector<double> ma,
                         std::array<double, 5> cumulants)
    : ar_(std::move(ar)), ma_(std::move(ma)), cumulants_(cumulants) {
    check_causal(ar_);
    for (double m : ma_)
        if (!std::isfinite(m)) throw InputError("MA coefficient is not finite");
    for (double c : cumulants_)
        if (!std::isfinite(c)) throw InputError("innovation cumulant is not finite");
    if (!(cumulants_[0] > 0.0)) throw InputError("innovation variance kappa_2 must be positive");
}

LinearModel::LinearModel(std::vector<double> ar, std::vector<double> ma, Innovation innov)
    : LinearModel(std::move(ar), std::move(ma), innovation_cumulants(innov)) {}

double LinearModel::cumulant(int r) const {
    if (r < 2 || r > 6) throw InputError("innovation cumulant order must be in 2..6");
    return cumulants_[r - 2];
}

LinearModel LinearModel::with_cumulants(std::array<double, 5> cumulants) const {
    return LinearModel(ar_, ma_, cumulants);
}

std::vector<double> LinearModel::psi_weights(std::size_t n) const {
    std::vector<double> psi(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double v = j == 0 ? 1.0 : (j <= ma_.size() ? ma_[j - 1] : 0.0);
        for (std::size_t i = 1; i <= std::min(j, ar_.size()); ++i) v += ar_[i - 1] * psi[j - i];
        psi[j] = v;
    }
    return psi;
}

cplx transfer(const LinearModel& model, double lambda) {
    const cplx z = std::polar(1.0, -lambda);
    cplx num{1.0, 0.0}, den{1.0, 0.0}, zp{1.0, 0.0};
    for (double m : model.ma()) {
        zp *= z;
        num += m * zp;
    }
    zp = 1.0;
    for (double a : model.ar()) {
        zp *= z;
        den -= a * zp;
    }
    if (std::abs(den) < 1e-14) throw SingularFilterError("AR polynomial vanishes on the unit circle");
    return num / den;
}

cplx linear_polyspectrum(const LinearModel& model, int r, std::span<const double> nu) {
    if (r < 1 || r > 5) throw InputError("polyspectrum order must be in 1..5");
    if (nu.size() != static_cast<std::size_t>(r)) throw InputError("frequency vector length must equal r");
    const double kappa = model.cumulant(r + 1);
    if (kappa == 0.0) return {0.0, 0.0};
    cplx prod{kappa, 0.0};
    double total = 0.0;
    for (double v : nu) {
        prod *= transfer(model, v);
        total += v;
    }
    return prod * transfer(model, -total);
}

LinearModel with_fourth_moment_constant(const LinearModel& model) {
    auto c = model.cumulants();
    c[2] = c[2] + 3.0 * c[0] * c[0];
    return model.with_cumulants(c);
}

HermiteCumulants hermite_autocumulants(const HermiteModel& model, long long h1, long long h2) {
    const double k2 = innovation_cumulant(model.innovation, 2);
    const double th = model.ma1_theta;
    auto c = [&](long long h) {
        if (h == 0) return k2 * (1.0 + th * th);
        if (h == 1 || h == -1) return k2 * th;
        return 0.0;
    };
    const double J1 = model.J1, J2 = model.J2;
    const double c1 = c(h1), c2 = c(h2), c12 = c(h1 - h2);
    HermiteCumulants out{};
    out.gamma2 = J1 * J1 * c1 + J2 * J2 * c1 * c1;
    const double s2 = std::sqrt(2.0);
    out.gamma3 = s2 * J1 * J1 * J2 * (c1 * c2 + c1 * c12 + c2 * c12) +
                 std::pow(s2 * J2, 3) * c1 * c2 * c12;
    return out;
}

PolynomialProcess::PolynomialProcess(std::vector<Term> terms, Innovation innov, std::string label)
    : terms_(std::move(terms)), innov_(innov), label_(std::move(label)) {
    if (terms_.empty()) throw InputError("polynomial process needs at least one term");
    for (const auto& t : terms_) {
        if (!std::isfinite(t.coef)) throw InputError("polynomial coefficient is not finite");
        int deg = 0;
        for (auto [lag, pw] : t.factors) {
            if (lag < 0 || pw < 1) throw InputError("polynomial factor needs lag >= 0 and power >= 1");
            memory_ = std::max(memory_, lag);
            deg += pw;
        }
        degree_ = std::max(degree_, deg);
    }
    eps_moments_ = innovation_moments(innov_, std::max(1, degree_ * 8));
}

double PolynomialProcess::evaluate(std::span<const double> window) const {
    if (window.size() < static_cast<std::size_t>(memory_ + 1))
        throw InputError("innovation window shorter than the process memory");
    double x = 0.0;
    for (const auto& t : terms_) {
        double v = t.coef;
        for (auto [lag, pw] : t.factors) v *= std::pow(window[lag], pw);
        x += v;
    }
    return x;
}

namespace {

std::vector<long long> normalized(std::span<const long long> times) {
    std::vector<long long> key(times.begin(), times.end());
    std::sort(key.begin(), key.end());
    const long long base = key.front();
    for (auto& v : key) v -= base;
    return key;
}

bool connected(const std::vector<long long>& sorted, int memory) {
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] - sorted[i - 1] > memory) return false;
    return true;
}

}  // namespace

double PolynomialProcess::moment(std::span<const long long> times) const {
    if (times.empty()) return 1.0;
    if (times.size() > 8) throw InputError("joint moments are limited to order 8");
    auto key = normalized(times);
    if (auto it = moment_cache_.find(key); it != moment_cache_.end()) return it->second;

    const std::size_t n = key.size();
    // eps index = time - lag + memory, spanning [0, span + memory]
    const std::size_t width = static_cast<std::size_t>(key.back() + memory_ + 1);
    std::vector<int> powers(width, 0);
    double total = 0.0;
    auto dfs = [&](auto& self, std::size_t i, double coef) -> void {
        if (i == n) {
            double e = coef;
            for (int p : powers) {
                if (p == 0) continue;
                e *= eps_moments_[p];
                if (e == 0.0) return;
            }
            total += e;
            return;
        }
        for (const auto& t : terms_) {
            for (auto [lag, pw] : t.factors) powers[key[i] - lag + memory_] += pw;
            self(self, i + 1, coef * t.coef);
            for (auto [lag, pw] : t.factors) powers[key[i] - lag + memory_] -= pw;
        }
    };
    dfs(dfs, 0, 1.0);
    moment_cache_.emplace(std::move(key), total);
    return total;
}

double PolynomialProcess::cumulant(std::span<const long long> lags) const {
    std::vector<long long> times;
    times.reserve(lags.size() + 1);
    times.push_back(0);
    times.insert(times.end(), lags.begin(), lags.end());
    auto key = normalized(times);
    if (!connected(key, memory_)) return 0.0;
    if (auto it = cumulant_cache_.find(key); it != cumulant_cache_.end()) return it->second;

    const int r = static_cast<int>(key.size());
    double total = 0.0;
    std::vector<long long> block;
    for (const auto& part : set_partitions(r)) {
        double prod = 1.0;
        for (const auto& b : part) {
            block.clear();
            for (int idx : b) block.push_back(key[idx]);
            prod *= moment(block);
            if (prod == 0.0) break;
        }
        const int nb = static_cast<int>(part.size());
        const double coef = ((nb - 1) % 2 ? -1.0 : 1.0) * std::tgamma(static_cast<double>(nb));
        total += coef * prod;
    }
    cumulant_cache_.emplace(std::move(key), total);
    return total;
}

PolynomialProcess hermite_process(const HermiteModel& m) {
    using Term = PolynomialProcess::Term;
    const double th = m.ma1_theta;
    // J1 Z + J2 Z^2 - J2 with Z = e0 + th e1
    std::vector<Term> terms{
        {m.J1, {{0, 1}}},
        {m.J1 * th, {{1, 1}}},
        {m.J2, {{0, 2}}},
        {2.0 * m.J2 * th, {{0, 1}, {1, 1}}},
        {m.J2 * th * th, {{1, 2}}},
        {-m.J2, {}},
    };
    return PolynomialProcess(std::move(terms), m.innovation, "hermite");
}

PolynomialProcess quadma_process(double theta) {
    using Term = PolynomialProcess::Term;
    std::vector<Term> terms{{1.0, {{0, 1}}}, {0.4, {{1, 1}}}, {theta, {{1, 2}}}, {-theta, {}}};
    return PolynomialProcess(std::move(terms), Innovation::Gauss01, "quadma");
}

PolynomialProcess ma_process(const std::vector<double>& ma, Innovation innov) {
    using Term = PolynomialProcess::Term;
    std::vector<Term> terms{{1.0, {{0, 1}}}};
    for (std::size_t i = 0; i < ma.size(); ++i)
        terms.push_back({ma[i], {{static_cast<int>(i + 1), 1}}});
    return PolynomialProcess(std::move(terms), innov, "ma");
}

CumulantSpectra::CumulantSpectra(const PolynomialProcess& process, int max_order)
    : max_order_(max_order), memory_(process.memory()), label_(process.label()) {
    if (max_order < 2 || max_order > 8) throw InputError("cumulant order must be in 2..8");
    for (int order = 2; order <= max_order; ++order) {
        const int R = radius(order);
        const std::size_t L = static_cast<std::size_t>(2 * R + 1);
        std::size_t size = 1;
        for (int d = 0; d < order - 1; ++d) {
            size *= L;
            if (size > 20'000'000) throw InputError("process memory too long for tabulated cumulants");
        }
        std::vector<double> table(size, 0.0);
        std::vector<long long> lags(order - 1);
        for (std::size_t idx = 0; idx < size; ++idx) {
            std::size_t rem = idx;
            for (int d = order - 2; d >= 0; --d) {
                lags[d] = static_cast<long long>(rem % L) - R;
                rem /= L;
            }
            table[idx] = process.cumulant(lags);
        }
        tables_.push_back(std::move(table));
    }
}

std::size_t CumulantSpectra::offset(int order, std::span<const long long> lags) const {
    const long long R = radius(order);
    const std::size_t L = static_cast<std::size_t>(2 * R + 1);
    std::size_t idx = 0;
    for (long long h : lags) {
        if (h < -R || h > R) return static_cast<std::size_t>(-1);
        idx = idx * L + static_cast<std::size_t>(h + R);
    }
    return idx;
}

double CumulantSpectra::cumulant(int order, std::span<const long long> lags) const {
    if (order < 2 || order > max_order_) throw InputError("cumulant order out of tabulated range");
    if (lags.size() != static_cast<std::size_t>(order - 1)) throw InputError("lag vector length must be order-1");
    std::size_t off = offset(order, lags);
    if (off == static_cast<std::size_t>(-1)) return 0.0;
    return tables_[order - 2][off];
}

cplx CumulantSpectra::polyspectrum(int r, std::span<const double> nu) const {
    if (r < 1 || r + 1 > max_order_) throw InputError("polyspectrum order out of tabulated range");
    if (nu.size() != static_cast<std::size_t>(r)) throw InputError("frequency vector length must equal r");
    const int R = radius(r + 1);
    const std::size_t L = static_cast<std::size_t>(2 * R + 1);
    const auto& table = tables_[r - 1];
    cplx acc{0.0, 0.0};
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
        if (table[idx] == 0.0) continue;
        std::size_t rem = idx;
        double phase = 0.0;
        for (int d = r - 1; d >= 0; --d) {
            phase += static_cast<double>(static_cast<long long>(rem % L) - R) * nu[d];
            rem /= L;
        }
        acc += table[idx] * std::polar(1.0, -phase);
    }
    return acc;
}

std::vector<cplx> CumulantSpectra::polyspectrum_grid(int r, int N) const {
    if (r < 1 || r + 1 > max_order_) throw InputError("polyspectrum order out of tabulated range");
    if (N < 1) throw InputError("grid size must be positive");
    const int R = radius(r + 1);
    const std::size_t L = static_cast<std::size_t>(2 * R + 1);
    std::vector<cplx> tw(static_cast<std::size_t>(N) * L);
    for (int n = 0; n < N; ++n)
        for (std::size_t h = 0; h < L; ++h) {
            long long lag = static_cast<long long>(h) - R;
            long long e = ((lag * n) % N + N) % N;
            tw[n * L + h] = std::polar(1.0, -kTwoPi * static_cast<double>(e) / N);
        }

    const auto& table = tables_[r - 1];
    std::vector<cplx> cur(table.begin(), table.end());
    std::vector<std::size_t> dims(r, L);
    // transform one axis at a time: lag -> frequency
    for (int a = 0; a < r; ++a) {
        std::size_t outer = 1, inner = 1;
        for (int d = 0; d < a; ++d) outer *= dims[d];
        for (int d = a + 1; d < r; ++d) inner *= dims[d];
        std::vector<cplx> next(outer * static_cast<std::size_t>(N) * inner);
        for (std::size_t o = 0; o < outer; ++o)
            for (int n = 0; n < N; ++n) {
                cplx* dst = &next[(o * N + n) * inner];
                for (std::size_t h = 0; h < L; ++h) {
                    const cplx w = tw[n * L + h];
                    const cplx* src = &cur[(o * L + h) * inner];
                    for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i] * w;
                }
            }
        cur.swap(next);
        dims[a] = static_cast<std::size_t>(N);
    }
    return cur;
}

ModelSpec parse_model(std::string_view spec) {
    detail::Params p(spec);
    const std::string& name = p.name();
    auto innov_or = [&](Innovation dflt) {
        auto v = p.get("innov");
        return v ? parse_innovation(*v) : dflt;
    };

    ModelSpec out;
    out.label = std::string(detail::trim(spec));
    if (name == "ar2-exp" || name == "ar2-chisq" || name == "arma21-exp" || name == "arma21-chisq") {
        const bool chisq = name.ends_with("chisq");
        out.innovation = chisq ? Innovation::ChiSq4m4 : Innovation::Exp1m1;
        std::vector<double> ma;
        if (name.starts_with("arma21")) ma = {0.8};
        out.linear.emplace(std::vector<double>{1.0, -0.9}, ma, out.innovation);
    } else if (name == "hermite") {
        HermiteModel hm;
        hm.J1 = p.number("J1", hm.J1);
        hm.J2 = p.number("J2", hm.J2);
        hm.ma1_theta = p.number("theta", hm.ma1_theta);
        hm.innovation = innov_or(Innovation::Exp1m1);
        out.innovation = hm.innovation;
        out.polynomial.emplace(hermite_process(hm));
    } else if (name == "quadma") {
        out.innovation = Innovation::Gauss01;
        out.polynomial.emplace(quadma_process(p.required("theta")));
    } else if (name == "ar1") {
        double phi = p.required("phi");
        out.innovation = innov_or(Innovation::Gauss01);
        out.linear.emplace(std::vector<double>{phi}, std::vector<double>{}, out.innovation);
    } else if (name == "ma1") {
        double theta = p.required("theta");
        out.innovation = innov_or(Innovation::Gauss01);
        out.linear.emplace(std::vector<double>{}, std::vector<double>{theta}, out.innovation);
    } else if (name == "white") {
        out.innovation = innov_or(Innovation::Gauss01);
        out.linear.emplace(std::vector<double>{}, std::vector<double>{}, out.innovation);
    } else if (name == "arma") {
        auto ar = p.get("ar");
        auto ma = p.get("ma");
        out.innovation = innov_or(Innovation::Gauss01);
        out.linear.emplace(ar ? detail::to_list("ar", *ar) : std::vector<double>{},
                           ma ? detail::to_list("ma", *ma) : std::vector<double>{}, out.innovation);
    } else {
        throw InputError("unknown model '" + name + "'");
    }
    p.finish();
    return out;
}

}  // namespace polyspec
