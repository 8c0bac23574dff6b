#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "polyspec/error.hpp"
#include "polyspec/series.hpp"

// Parsing of "name:key=value,key=value" labels shared by the model and weight
// catalogs.
namespace polyspec::detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline double to_double(std::string_view key, std::string_view text) {
    std::string buf(trim(text));
    double v = 0.0;
    if (!csv::parse_double(buf, v))
        throw InputError("parameter '" + std::string(key) + "' is not a finite number: '" + buf + "'");
    return v;
}

inline long long to_integer(std::string_view key, std::string_view text) {
    double v = to_double(key, text);
    if (v != static_cast<double>(static_cast<long long>(v)))
        throw InputError("parameter '" + std::string(key) + "' must be an integer");
    return static_cast<long long>(v);
}

/// Slash-separated list, e.g. "1/-0.9".
inline std::vector<double> to_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find('/', start);
        out.push_back(to_double(key, text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

class Params {
public:
    /// Splits "name:k=v,..." into a name and its parameters.
    explicit Params(std::string_view label) {
        label = trim(label);
        auto colon = label.find(':');
        name_ = std::string(trim(label.substr(0, colon)));
        if (colon == std::string_view::npos) return;
        std::string_view rest = label.substr(colon + 1);
        if (trim(rest).empty()) return;
        std::size_t start = 0;
        while (true) {
            auto pos = rest.find(',', start);
            auto item = trim(rest.substr(start, pos == std::string_view::npos ? pos : pos - start));
            auto eq = item.find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw InputError("malformed parameter '" + std::string(item) + "' (expected key=value)");
            std::string key(trim(item.substr(0, eq)));
            if (values_.count(key)) throw InputError("duplicate parameter '" + key + "'");
            values_.emplace(key, std::string(trim(item.substr(eq + 1))));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
    }

    const std::string& name() const { return name_; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const std::string* get(const std::string& key) {
        used_.push_back(key);
        auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }
    double number(const std::string& key, double dflt) {
        auto v = get(key);
        return v ? to_double(key, *v) : dflt;
    }
    double required(const std::string& key) {
        auto v = get(key);
        if (!v) throw InputError("'" + name_ + "' requires " + key + "=<value>");
        return to_double(key, *v);
    }

    /// Throws when a parameter was supplied that no get() call asked for.
    void finish() const {
        for (const auto& [key, value] : values_) {
            bool seen = false;
            for (const auto& u : used_) seen = seen || u == key;
            if (!seen) throw InputError("'" + name_ + "' does not take parameter '" + key + "'");
        }
    }

private:
    std::string name_;
    std::map<std::string, std::string> values_;
    std::vector<std::string> used_;
};

}  // namespace polyspec::detail
