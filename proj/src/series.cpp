#include "polyspec/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include "polyspec/error.hpp"

namespace polyspec {

TimeSeries::TimeSeries(std::vector<double> values, bool centered)
    : values_(std::move(values)), centered_(centered) {
    if (values_.size() < 2) throw InputError("time series needs at least 2 values");
    for (double v : values_) {
        if (!std::isfinite(v)) throw InputError("time series contains a non-finite value");
    }
    if (centered_) {
        double scale = 0.0;
        for (double v : values_) scale = std::max(scale, std::abs(v));
        if (std::abs(mean()) > 1e-12 * std::max(scale, 1e-300) && scale > 0.0)
            throw InputError("series flagged centered but its mean is not zero");
    }
}

double TimeSeries::mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) /
           static_cast<double>(values_.size());
}

TimeSeries center(const TimeSeries& series) {
    if (series.centered()) return series;
    const double mu = series.mean();
    std::vector<double> out(series.values().begin(), series.values().end());
    for (double& v : out) v -= mu;
    // Second pass absorbs the rounding left by the first subtraction.
    double resid = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
    for (double& v : out) v -= resid;
    return TimeSeries(std::move(out), true);
}

long long canonical_index(long long ell, long long T) {
    long long r = ell % T;
    if (r < 0) r += T;
    return r > T / 2 ? r - T : r;
}

FreqIndex::FreqIndex(long long ell_, long long T_) : ell(ell_), T(T_) {
    if (T < 1) throw InputError("FreqIndex: T must be positive");
    if (ell < grid_low(T) || ell > grid_high(T))
        throw InputError("FreqIndex: index outside the canonical Fourier grid");
}

double FreqIndex::frequency() const {
    return kTwoPi * static_cast<double>(ell) / static_cast<double>(T);
}

DftTable::DftTable(std::vector<cplx> by_residue, std::size_t T)
    : coeffs_(std::move(by_residue)), T_(T) {
    if (coeffs_.size() != T_) throw InputError("DftTable: coefficient count must equal T");
}

DftTable dft(const TimeSeries& series) {
    const std::size_t T = series.size();
    std::vector<cplx> twiddle(T);
    for (std::size_t n = 0; n < T; ++n) {
        double ang = -kTwoPi * static_cast<double>(n) / static_cast<double>(T);
        twiddle[n] = {std::cos(ang), std::sin(ang)};
    }
    auto x = series.values();
    std::vector<cplx> coeffs(T);
    for (std::size_t ell = 0; ell < T; ++ell) {
        cplx acc{0.0, 0.0};
        std::size_t idx = ell % T;  // (ell * t) mod T for t = 1
        for (std::size_t t = 1; t <= T; ++t) {
            acc += x[t - 1] * twiddle[idx];
            idx += ell;
            if (idx >= T) idx -= T;
        }
        coeffs[ell] = acc;
    }
    return DftTable(std::move(coeffs), T);
}

namespace csv {

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

bool parse_double(const std::string& field, double& out) {
    auto b = field.find_first_not_of(" \t");
    if (b == std::string::npos) return false;
    auto e = field.find_last_not_of(" \t");
    const char* first = field.data() + b;
    const char* last = field.data() + e + 1;
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace csv

TimeSeries read_series_csv(std::istream& in) {
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = csv::split_record(line);
        double v = 0.0;
        if (!csv::parse_double(fields.back(), v)) {
            double raw = 0.0;
            const std::string& f = fields.back();
            auto b = f.find_first_not_of(" \t");
            bool numeric_text =
                b != std::string::npos &&
                std::from_chars(f.data() + b, f.data() + f.size(), raw).ec == std::errc();
            if (values.empty() && lineno == 1 && !numeric_text) continue;  // header
            throw InputError("series CSV line " + std::to_string(lineno) +
                             ": not a finite number: '" + fields.back() + "'");
        }
        values.push_back(v);
    }
    return TimeSeries(std::move(values));
}

TimeSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_series_csv(in);
}

}  // namespace polyspec
