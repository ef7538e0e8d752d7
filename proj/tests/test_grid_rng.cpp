#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mfto/grid.hpp"
#include "mfto/rng.hpp"

using namespace mfto;

TEST_CASE("flattened index runs with the first axis fastest and round-trips") {
    TensorGrid g({{0, 4, 4, Boundary::truncated}, {0, 3, 3, Boundary::truncated}});
    CHECK(g.size() == 12);
    CHECK(g.flatten({1, 0}) == 1);
    CHECK(g.flatten({0, 1}) == 4);
    std::vector<int> idx;
    for (std::int64_t f = 0; f < g.size(); ++f) {
        g.unflatten(f, idx);
        CHECK(g.flatten(idx) == f);
    }
}

TEST_CASE("cell centers, volume and description") {
    TensorGrid g({{-2, 2, 4, Boundary::truncated}, {0, 1, 2, Boundary::truncated}});
    CHECK(g.cell_volume() == doctest::Approx(0.5));
    Eigen::VectorXd c = g.center(0);
    CHECK(c[0] == doctest::Approx(-1.5));
    CHECK(c[1] == doctest::Approx(0.25));
    CHECK(g.describe() == "4x2");
}

TEST_CASE("locate folds periodic and reflecting coordinates") {
    TensorGrid g({{0, 2 * M_PI, 8, Boundary::periodic}, {0, M_PI, 4, Boundary::reflecting}});
    Eigen::VectorXd x(2);
    x << 2 * M_PI + 0.1, 0.1;
    CHECK(g.locate(x) == g.locate((Eigen::VectorXd(2) << 0.1, 0.1).finished()));
    // reflecting: -0.1 folds to +0.1, pi + 0.1 folds to pi - 0.1
    x << 0.1, -0.1;
    CHECK(g.locate(x) == g.locate((Eigen::VectorXd(2) << 0.1, 0.1).finished()));
    x << 0.1, M_PI + 0.1;
    CHECK(g.locate(x) == g.locate((Eigen::VectorXd(2) << 0.1, M_PI - 0.1).finished()));
}

TEST_CASE("locate returns -1 outside truncated axes and handles the upper edge") {
    TensorGrid g({{0, 1, 4, Boundary::truncated}});
    CHECK(g.locate((Eigen::VectorXd(1) << -0.01).finished()) == -1);
    CHECK(g.locate((Eigen::VectorXd(1) << 1.01).finished()) == -1);
    CHECK(g.locate((Eigen::VectorXd(1) << 1.0).finished()) == 3);
    CHECK(g.locate((Eigen::VectorXd(1) << 0.0).finished()) == 0);
}

TEST_CASE("multilinear interpolation is exact for affine data") {
    TensorGrid g({{0, 1, 8, Boundary::truncated}, {0, 2, 6, Boundary::truncated}});
    Eigen::VectorXd vals(g.size());
    for (std::int64_t f = 0; f < g.size(); ++f) {
        Eigen::VectorXd c = g.center(f);
        vals[f] = 2.0 + 3.0 * c[0] - 1.5 * c[1];
    }
    Eigen::VectorXd x(2);
    x << 0.37, 1.21;
    CHECK(g.interpolate(vals, x) == doctest::Approx(2.0 + 3.0 * 0.37 - 1.5 * 1.21).epsilon(1e-12));
}

TEST_CASE("interpolation out-of-range policies on truncated axes") {
    TensorGrid g({{0, 1, 4, Boundary::truncated}});
    Eigen::VectorXd vals = Eigen::VectorXd::Constant(4, 7.0);
    Eigen::VectorXd x(1);
    x << 1.4;
    CHECK(g.interpolate(vals, x, OutOfRange::zero) == 0.0);
    CHECK(g.interpolate(vals, x, OutOfRange::clamp) == doctest::Approx(7.0));
    CHECK_THROWS_AS(g.interpolate(vals, x, OutOfRange::error), EvaluationError);
}

TEST_CASE("interpolation wraps periodic axes") {
    TensorGrid g({{0, 1, 4, Boundary::periodic}});
    Eigen::VectorXd vals(4);
    vals << 1.0, 2.0, 3.0, 4.0;
    // halfway between the last and (wrapped) first center
    Eigen::VectorXd x(1);
    x << 0.0;
    CHECK(g.interpolate(vals, x) == doctest::Approx(0.5 * (4.0 + 1.0)));
}

TEST_CASE("splitmix64 matches the reference sequence") {
    // reference: splitmix64 seeded with 1234567, first three next() outputs
    std::uint64_t expect[3] = {6457827717110365317ULL, 3203168211198807973ULL,
                               9817491932198370423ULL};
    std::uint64_t gamma = 0x9e3779b97f4a7c15ULL;
    CHECK(splitmix64(1234567ULL) == expect[0]);
    CHECK(splitmix64(1234567ULL + gamma) == expect[1]);
    CHECK(splitmix64(1234567ULL + 2 * gamma) == expect[2]);
}

TEST_CASE("equal seeds give bit-identical streams; distinct streams differ") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.uniform01() == b.uniform01());
    Rng s0 = Rng::for_stream(42, 0);
    Rng s1 = Rng::for_stream(42, 1);
    int diff = 0;
    for (int i = 0; i < 64; ++i)
        if (s0.raw() != s1.raw()) ++diff;
    CHECK(diff > 60);
}

TEST_CASE("uniform01 lies in [0,1) and has the right moments") {
    Rng rng(7);
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 3.0 / std::sqrt(12.0 * n));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal() consumes exactly two engine draws and has unit variance") {
    // draw pattern oracle: replicate Box-Muller from the same raw stream
    Rng a(99);
    std::mt19937_64 engine(99);
    auto u = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 100; ++i) {
        double u1 = u(), u2 = u();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double expect = std::sqrt(-2.0 * std::log(u1)) *
                              std::cos(6.283185307179586476925286766559 * u2);
        CHECK(a.normal() == expect);
    }
    Rng b(123);
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double x = b.normal();
        sum += x;
        sum2 += x * x;
    }
    CHECK(std::abs(sum / n) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("invalid axes and unknown boundary names are rejected") {
    CHECK_THROWS_AS(TensorGrid({{1, 0, 4, Boundary::truncated}}), ConfigError);
    CHECK_THROWS_AS(TensorGrid({{0, 1, 0, Boundary::truncated}}), ConfigError);
    CHECK_THROWS_AS(boundary_from_name("nope"), ConfigError);
    CHECK(boundary_from_name("periodic") == Boundary::periodic);
    CHECK(boundary_name(Boundary::reflecting) == "reflecting");
}
