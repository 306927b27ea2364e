// test_rng.cpp -- determinism and distributional sanity of the RNG streams.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vsiv/rng.hpp"

using namespace vsiv;

TEST_CASE("identical seeds give identical sequences") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("per-replication streams are deterministic and distinct") {
    Rng a = Rng::stream(7, 3), b = Rng::stream(7, 3), c = Rng::stream(7, 4);
    bool all_equal = true;
    for (int i = 0; i < 100; ++i) {
        std::uint64_t x = a.next_u64();
        REQUIRE(x == b.next_u64());
        if (x != c.next_u64()) all_equal = false;
    }
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniform stays in (0, 1) with the right mean and variance") {
    Rng rng(123);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sumsq += u * u;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(std::fabs(mean - 0.5) < 0.01);
    CHECK(std::fabs(var - 1.0 / 12.0) < 0.01);
}

TEST_CASE("normal has standard moments and exact symmetry of the transform") {
    Rng rng(456);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    CHECK(std::fabs(sum / n) < 0.02);
    CHECK(std::fabs(sumsq / n - 1.0) < 0.03);
}

TEST_CASE("normal(mean, sd) is the affine transform of a standard draw") {
    Rng a(9), b(9);
    for (int i = 0; i < 50; ++i) REQUIRE(a.normal(2.0, 3.0) == 2.0 + 3.0 * b.normal());
}
