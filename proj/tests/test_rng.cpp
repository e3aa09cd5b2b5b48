#include <catch2/catch_amalgamated.hpp>

#include "ssco/rng.hpp"
#include "ssco/vec.hpp"

using namespace ssco;

TEST_CASE("same seed gives identical streams", "[rng]") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("key-derived streams differ per component", "[rng]") {
    Rng a = Rng::from_key({1, 2, 3});
    Rng b = Rng::from_key({1, 2, 4});
    Rng c = Rng::from_key({1, 2, 3});
    REQUIRE(a.next_u64() != b.next_u64());
    REQUIRE(Rng::from_key({1, 2, 3}).next_u64() == c.next_u64());
}

TEST_CASE("uniform01 stays in range and has sane mean", "[rng]") {
    Rng rng(7);
    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc += u;
    }
    REQUIRE(acc / n == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("uniform_int covers [0,n) without bias", "[rng]") {
    Rng rng(11);
    int counts[5] = {0, 0, 0, 0, 0};
    const int n = 50000;
    for (int i = 0; i < n; ++i) ++counts[rng.uniform_int(5)];
    for (int c : counts) REQUIRE(std::abs(c - n / 5) < 600);
}

TEST_CASE("normal moments", "[rng]") {
    Rng rng(3);
    const int n = 50000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    REQUIRE(sum / n == Catch::Approx(0.0).margin(0.02));
    REQUIRE(sq / n == Catch::Approx(1.0).margin(0.03));
}

TEST_CASE("dirichlet sums to one", "[rng]") {
    Rng rng(9);
    Vec x(8);
    rng.dirichlet(0.3, x);
    double total = 0.0;
    for (double v : x) {
        REQUIRE(v >= 0.0);
        total += v;
    }
    REQUIRE(total == Catch::Approx(1.0).epsilon(1e-12));
}
