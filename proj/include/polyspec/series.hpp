#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace polyspec {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// A finite, regularly spaced real sample X_1..X_T.
class TimeSeries {
public:
    /// Throws InputError when T < 2, a value is not finite, or `centered` is
    /// claimed but the mean is not zero.
    explicit TimeSeries(std::vector<double> values, bool centered = false);

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool centered() const { return centered_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double mean() const;

private:
    std::vector<double> values_;
    bool centered_ = false;
};

TimeSeries center(const TimeSeries& series);

/// Maps any integer index onto the canonical Fourier grid for length T:
/// (-T/2, T/2] for even T, [-(T-1)/2, (T-1)/2] for odd T.
long long canonical_index(long long ell, long long T);

/// A Fourier index ell with frequency 2*pi*ell/T in (-pi, pi].
struct FreqIndex {
    long long ell;
    long long T;

    FreqIndex(long long ell, long long T);
    double frequency() const;
};

inline long long grid_low(long long T) { return -((T - 1) / 2); }
inline long long grid_high(long long T) { return T / 2; }

/// d(2*pi*ell/T) = sum_{t=1}^{T} X_t exp(-i*2*pi*ell*t/T), stored for ell mod T.
class DftTable {
public:
    DftTable(std::vector<cplx> by_residue, std::size_t T);

    std::size_t length() const { return T_; }
    /// Coefficient at any integer index; reduced mod T.
    cplx at(long long ell) const {
        long long r = ell % static_cast<long long>(T_);
        if (r < 0) r += static_cast<long long>(T_);
        return coeffs_[static_cast<std::size_t>(r)];
    }
    std::span<const cplx> by_residue() const { return coeffs_; }

private:
    std::vector<cplx> coeffs_;
    std::size_t T_;
};

DftTable dft(const TimeSeries& series);

/// Reads a single numeric column (an optional header row and an optional
/// leading id/time column are skipped). Rejects NaN and Inf.
TimeSeries read_series_csv(std::istream& in);
TimeSeries read_series_csv(const std::string& path);

namespace csv {
/// Splits one RFC-4180 record. Quoted fields may contain commas and "".
std::vector<std::string> split_record(const std::string& line);
/// Locale-independent parse; returns false on junk or non-finite values.
bool parse_double(const std::string& field, double& out);
}  // namespace csv

}  // namespace polyspec
