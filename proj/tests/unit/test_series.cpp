#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "polyspec/error.hpp"
#include "polyspec/series.hpp"

using namespace polyspec;

TEST_CASE("center subtracts the mean") {
    auto c = center(TimeSeries({1, 2, 3}));
    CHECK(c.centered());
    CHECK(c[0] == doctest::Approx(-1.0));
    CHECK(c[1] == doctest::Approx(0.0));
    CHECK(c[2] == doctest::Approx(1.0));

    auto z = center(TimeSeries({0, 0, 0, 0}));
    for (double v : z.values()) CHECK(v == 0.0);

    auto k = center(TimeSeries({5, 5}));
    CHECK(k[0] == 0.0);
    CHECK(k[1] == 0.0);
}

TEST_CASE("center is idempotent") {
    auto once = center(TimeSeries(oracle::random_series(37, 3)));
    auto twice = center(once);
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i] == twice[i]);
}

TEST_CASE("time series validation") {
    CHECK_THROWS_AS(TimeSeries({1.0}), InputError);
    CHECK_THROWS_AS(TimeSeries({}), InputError);
    CHECK_THROWS_AS(TimeSeries({1.0, std::nan("")}), InputError);
    CHECK_THROWS_AS(TimeSeries({1.0, INFINITY}), InputError);
    CHECK_THROWS_AS(TimeSeries({1.0, 2.0}, true), InputError);
    CHECK_NOTHROW(TimeSeries({-1.0, 1.0}, true));
}

TEST_CASE("frequency index bookkeeping") {
    CHECK(canonical_index(5, 8) == -3);
    CHECK(canonical_index(4, 8) == 4);
    CHECK(canonical_index(-4, 8) == 4);
    CHECK(canonical_index(3, 7) == 3);
    CHECK(canonical_index(4, 7) == -3);
    CHECK(grid_low(8) == -3);
    CHECK(grid_high(8) == 4);
    CHECK(grid_low(7) == -3);
    CHECK(grid_high(7) == 3);
    CHECK(FreqIndex(4, 8).frequency() == doctest::Approx(oracle::pi));
    CHECK_THROWS_AS(FreqIndex(-4, 8), InputError);
    for (long long T : {7, 8}) {
        for (long long l = grid_low(T); l <= grid_high(T); ++l) {
            double f = FreqIndex(l, T).frequency();
            CHECK(f > -oracle::pi);
            CHECK(f <= oracle::pi + 1e-15);
        }
    }
}

TEST_CASE("dft of an impulse at t=1") {
    auto d = dft(TimeSeries({1, 0, 0, 0}));
    for (long long l = grid_low(4); l <= grid_high(4); ++l) {
        const double lam = 2 * oracle::pi * l / 4.0;
        CHECK(std::abs(d.at(l) - std::polar(1.0, -lam)) < 1e-14);
        CHECK(std::abs(d.at(l)) == doctest::Approx(1.0));
    }
}

TEST_CASE("dft of a constant series") {
    auto d = dft(TimeSeries({1, 1, 1, 1}));
    CHECK(std::abs(d.at(0) - cplx(4.0, 0.0)) < 1e-14);
    for (long long l : {-1, 1, 2}) CHECK(std::abs(d.at(l)) < 1e-14);
}

TEST_CASE("dft matches the definitional sum") {
    for (std::size_t T : {16u, 17u, 5u}) {
        auto x = oracle::random_series(T, 10 + T);
        auto d = dft(TimeSeries(x));
        double scale = 0.0;
        for (long long l = 0; l < (long long)T; ++l) scale = std::max(scale, std::abs(oracle::dft_at(x, l)));
        for (long long l = grid_low(T); l <= grid_high(T); ++l)
            CHECK(std::abs(d.at(l) - oracle::dft_at(x, l)) <= 1e-10 * scale);
    }
}

TEST_CASE("dft conjugate symmetry and Parseval") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const std::size_t T = 20 + 7 * seed;
        auto x = oracle::random_series(T, seed);
        auto d = dft(TimeSeries(x));
        double energy = 0.0, spec = 0.0;
        for (double v : x) energy += v * v;
        for (long long l = 0; l < (long long)T; ++l) {
            spec += std::norm(d.at(l));
            CHECK(std::abs(d.at(-l) - std::conj(d.at(l))) < 1e-10);
        }
        CHECK(std::abs(energy - spec / T) <= 1e-9 * energy);
    }
}

TEST_CASE("dft of a centered series vanishes at zero") {
    auto x = oracle::random_series(64, 99);
    for (auto& v : x) v = 1000.0 + 50.0 * v;
    auto c = center(TimeSeries(x));
    double mx = 0.0;
    for (double v : c.values()) mx = std::max(mx, std::abs(v));
    CHECK(std::abs(dft(c).at(0)) <= 1e-9 * 64 * mx);
}

TEST_CASE("csv reader") {
    std::istringstream plain("1.5\n2\n-3e-1\n");
    auto s = read_series_csv(plain);
    REQUIRE(s.size() == 3);
    CHECK(s[2] == doctest::Approx(-0.3));

    std::istringstream header("date,value\n\"1749-01, Jan\",58.0\n1749-02,62.6\n\n");
    auto h = read_series_csv(header);
    REQUIRE(h.size() == 2);
    CHECK(h[0] == 58.0);
    CHECK(h[1] == 62.6);

    std::istringstream bad("1\nNaN\n3\n");
    CHECK_THROWS_AS(read_series_csv(bad), InputError);
    std::istringstream inf("inf\n1\n2\n");
    CHECK_THROWS_AS(read_series_csv(inf), InputError);
    std::istringstream junk("x\n1\nabc\n");
    CHECK_THROWS_AS(read_series_csv(junk), InputError);
    CHECK_THROWS_AS(read_series_csv(std::string("/nonexistent/file.csv")), InputError);
}

TEST_CASE("csv record splitting") {
    auto f = csv::split_record("a,\"b,c\",\"d\"\"e\"");
    REQUIRE(f.size() == 3);
    CHECK(f[1] == "b,c");
    CHECK(f[2] == "d\"e");
    double v = 0;
    CHECK(csv::parse_double(" 2.5 ", v));
    CHECK(v == 2.5);
    CHECK_FALSE(csv::parse_double("2,5", v));
    CHECK_FALSE(csv::parse_double("nan", v));
}
