#include "polyspec/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polyspec/detail/params.hpp"
#include "polyspec/error.hpp"

namespace polyspec {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void need_order(std::span<const double> lambda, int k) {
    if (lambda.size() != static_cast<std::size_t>(k))
        throw InputError("weight expects " + std::to_string(k) + " frequencies");
}

}  // namespace

WeightFunction::WeightFunction(int order, Fn fn, bool claims_symmetry, std::string label)
    : order_(order), fn_(std::move(fn)), symmetric_(claims_symmetry), label_(std::move(label)) {
    if (order_ < 1) throw InputError("weight order must be positive");
    if (!fn_) throw InputError("weight needs an evaluation callback");
}

cplx WeightFunction::operator()(double l1) const {
    const double v[1] = {l1};
    return fn_(v);
}

cplx WeightFunction::operator()(double l1, double l2) const {
    const double v[2] = {l1, l2};
    return fn_(v);
}

WeightFunction& WeightFunction::set_lags(std::vector<long long> h) {
    lags_ = std::move(h);
    return *this;
}

WeightFunction& WeightFunction::set_filter_cancel(FilterCancel c) {
    cancel_ = std::move(c);
    return *this;
}

WeightFunction& WeightFunction::set_zero() {
    zero_ = true;
    return *this;
}

double symmetry_defect(const WeightFunction& g, int N) {
    if (N < 2) throw InputError("symmetry grid needs N >= 2");
    const int k = g.order();
    std::vector<int> idx(k, -(N - 1) / 2);
    std::vector<double> x(k), nx(k);
    double worst = 0.0;
    while (true) {
        bool inside = true;
        for (int d = 0; d < k; ++d) {
            // N/2 maps to pi, whose negation is outside (-pi, pi]
            if (2 * idx[d] == N) inside = false;
            x[d] = kTwoPi * idx[d] / N;
            nx[d] = -x[d];
        }
        if (inside) worst = std::max(worst, std::abs(g(nx) - std::conj(g(x))));
        int d = k - 1;
        while (d >= 0 && ++idx[d] > N / 2) idx[d--] = -(N - 1) / 2;
        if (d < 0) break;
    }
    return worst;
}

bool check_symmetry(const WeightFunction& g, int N, double tol) {
    return symmetry_defect(g, N) <= tol;
}

WeightFunction lag_weight(int k, std::vector<long long> h) {
    if (k < 1) throw InputError("lag_weight: k must be >= 1");
    if (h.size() != static_cast<std::size_t>(k)) throw InputError("lag_weight: need k lags");
    const double scale = std::pow(kTwoPi, -k);
    std::string label = "lag:";
    for (int j = 0; j < k; ++j) {
        if (j) label += ',';
        label += (k == 1 ? std::string("h") : "h" + std::to_string(j + 1)) + "=" + std::to_string(h[j]);
    }
    auto fn = [k, h, scale](std::span<const double> l) {
        need_order(l, k);
        double phase = 0.0;
        for (int j = 0; j < k; ++j) phase += l[j] * static_cast<double>(h[j]);
        return std::polar(scale, phase);
    };
    WeightFunction g(k, fn, true, label);
    g.set_lags(std::move(h));
    return g;
}

WeightFunction band_indicator(double a1, double b1, double a2, double b2) {
    if (!(a1 < b1) || !(a2 < b2)) throw InputError("band_indicator: bounds must satisfy a < b");
    const bool sym = a1 == -b1 && a2 == -b2;
    auto fn = [=](std::span<const double> l) {
        need_order(l, 2);
        bool in = l[0] >= a1 && l[0] <= b1 && l[1] >= a2 && l[1] <= b2;
        return cplx(in ? 1.0 : 0.0, 0.0);
    };
    return WeightFunction(2, fn, sym,
                          "band:a1=" + fmt(a1) + ",b1=" + fmt(b1) + ",a2=" + fmt(a2) + ",b2=" + fmt(b2));
}

WeightFunction annulus_indicator(double a, double b) {
    if (!(a >= 0.0) || !(a < b)) throw InputError("annulus_indicator: need 0 <= a < b");
    auto fn = [=](std::span<const double> l) {
        need_order(l, 2);
        const double r2 = l[0] * l[0] + l[1] * l[1];
        return cplx(a < r2 && r2 <= b ? 1.0 : 0.0, 0.0);
    };
    return WeightFunction(2, fn, true, "annulus:a=" + fmt(a) + ",b=" + fmt(b));
}

WeightFunction bartlett_weight() {
    auto fn = [](std::span<const double> l) {
        need_order(l, 2);
        return cplx((kPi - std::abs(l[0])) * (kPi - std::abs(l[1])), 0.0);
    };
    return WeightFunction(2, fn, true, "bartlett");
}

WeightFunction cosine_product_weight(double scale) {
    auto fn = [scale](std::span<const double> l) {
        need_order(l, 2);
        return cplx(scale * std::cos(3.0 * l[0]) * std::cos(l[1]), 0.0);
    };
    const double dflt = 1.0 / (16.0 * kPi * kPi);
    std::string label = scale == dflt ? "cosprod" : "cosprod:scale=" + fmt(scale);
    return WeightFunction(2, fn, true, label);
}

WeightFunction cone_weight() {
    auto fn = [](std::span<const double> l) {
        need_order(l, 2);
        return cplx(1.0 - std::sqrt((l[0] * l[0] + l[1] * l[1]) / 2.0), 0.0);
    };
    return WeightFunction(2, fn, true, "cone");
}

WeightFunction wcob_numerator_weight(int axis) {
    if (axis != 1 && axis != 2) throw InputError("wcob axis must be 1 or 2");
    auto fn = [axis](std::span<const double> l) {
        need_order(l, 2);
        return cplx(l[axis - 1], 0.0);
    };
    return WeightFunction(2, fn, false, "wcob:axis=" + std::to_string(axis));
}

WeightFunction constant_weight(int k, double c) {
    if (!std::isfinite(c)) throw InputError("constant weight must be finite");
    auto fn = [k, c](std::span<const double> l) {
        need_order(l, k);
        return cplx(c, 0.0);
    };
    WeightFunction g(k, fn, true, "const:c=" + fmt(c));
    if (c == 0.0) g.set_zero();
    return g;
}

WeightFunction zero_weight(int k) {
    auto fn = [k](std::span<const double> l) {
        need_order(l, k);
        return cplx(0.0, 0.0);
    };
    WeightFunction g(k, fn, true, "zero");
    g.set_zero();
    return g;
}

cplx filter_triple(const LinearModel& model, double x1, double x2) {
    return transfer(model, x1) * transfer(model, x2) * transfer(model, -(x1 + x2));
}

WeightFunction lintest_weight(int j, int k, const LinearModel& model, int grid_n) {
    if (grid_n < 2) throw InputError("lintest_weight: grid_n must be >= 2");
    // cheap scan on the working grid
    std::vector<cplx> psi(grid_n);
    for (int n = 0; n < grid_n; ++n) psi[n] = transfer(model, kTwoPi * n / grid_n);
    for (int a = 0; a < grid_n; ++a)
        for (int b = 0; b < grid_n; ++b) {
            const cplx v = psi[a] * psi[b] * std::conj(psi[(a + b) % grid_n]);
            if (std::abs(v) < 1e-8) throw SingularFilterError("lintest weight: |Psi| below 1e-8 on the grid");
        }
    auto fn = [j, k, model](std::span<const double> x) {
        need_order(x, 2);
        return std::polar(1.0, j * x[0] + k * x[1]) / filter_triple(model, x[0], x[1]);
    };
    WeightFunction g(2, fn, true, "lintest:j=" + std::to_string(j) + ",k=" + std::to_string(k));
    g.set_filter_cancel(FilterCancel{model, j, k});
    return g;
}

WeightFunction tabulated_weight(int k, int N, std::vector<cplx> values, bool claims_symmetry,
                                std::string label) {
    if (k < 1 || N < 1) throw InputError("tabulated_weight: need k >= 1 and N >= 1");
    std::size_t expect = 1;
    for (int d = 0; d < k; ++d) expect *= static_cast<std::size_t>(N);
    if (values.size() != expect) throw InputError("tabulated_weight: expected N^k values");
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw InputError("tabulated_weight: non-finite value");
    auto fn = [k, N, vals = std::move(values)](std::span<const double> l) {
        need_order(l, k);
        std::size_t idx = 0;
        for (int d = 0; d < k; ++d) {
            long long n = std::llround(l[d] * N / kTwoPi);
            n = ((n % N) + N) % N;
            idx = idx * N + static_cast<std::size_t>(n);
        }
        return vals[idx];
    };
    return WeightFunction(k, fn, claims_symmetry, std::move(label));
}

WeightFunction parse_weight(std::string_view label, int k, const LinearModel* model) {
    detail::Params p(label);
    const std::string& name = p.name();
    auto order_check = [&](int got) {
        if (k > 0 && got != k)
            throw InputError("weight '" + std::string(label) + "' has order " + std::to_string(got) +
                             ", expected " + std::to_string(k));
    };
    std::optional<WeightFunction> g;
    if (name == "lag") {
        std::vector<long long> h;
        if (p.has("h")) {
            h.push_back(detail::to_integer("h", *p.get("h")));
        } else {
            for (int j = 1; p.has("h" + std::to_string(j)); ++j) {
                const std::string key = "h" + std::to_string(j);
                h.push_back(detail::to_integer(key, *p.get(key)));
            }
        }
        if (h.empty()) {
            if (k < 1) throw InputError("lag weight needs h=<lag> or h1=..,h2=..");
            h.assign(k, 0);
        }
        order_check(static_cast<int>(h.size()));
        g = lag_weight(static_cast<int>(h.size()), h);
    } else if (name == "band") {
        order_check(2);
        g = band_indicator(p.required("a1"), p.required("b1"), p.required("a2"), p.required("b2"));
    } else if (name == "annulus") {
        order_check(2);
        g = annulus_indicator(p.required("a"), p.required("b"));
    } else if (name == "bartlett") {
        order_check(2);
        g = bartlett_weight();
    } else if (name == "cosprod") {
        order_check(2);
        g = cosine_product_weight(p.number("scale", 1.0 / (16.0 * kPi * kPi)));
    } else if (name == "cone") {
        order_check(2);
        g = cone_weight();
    } else if (name == "wcob") {
        order_check(2);
        g = wcob_numerator_weight(static_cast<int>(detail::to_integer("axis", p.get("axis") ? *p.get("axis") : "1")));
    } else if (name == "const") {
        if (k < 1) throw InputError("constant weight needs an order");
        g = constant_weight(k, p.number("c", 1.0));
    } else if (name == "zero") {
        if (k < 1) throw InputError("zero weight needs an order");
        g = zero_weight(k);
    } else if (name == "lintest") {
        order_check(2);
        if (!model) throw InputError("lintest weight needs a model");
        auto j = p.get("j");
        auto kk = p.get("k");
        if (!j || !kk) throw InputError("lintest weight needs j=<int>,k=<int>");
        g = lintest_weight(static_cast<int>(detail::to_integer("j", *j)),
                           static_cast<int>(detail::to_integer("k", *kk)), *model);
    } else {
        throw InputError("unknown weight '" + name + "'");
    }
    p.finish();
    return *g;
}

}  // namespace polyspec
