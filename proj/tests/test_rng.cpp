#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "pdmp/rng.hpp"

using namespace pdmp;

TEST_CASE("same seed gives bit-identical streams", "[rng]") {
    Philox a(123, 0), b(123, 0);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and streams differ", "[rng]") {
    Philox a(123, 0), b(124, 0), c(123, 1);
    int eq_seed = 0, eq_stream = 0;
    for (int i = 0; i < 256; ++i) {
        std::uint64_t va = a.next_u64();
        if (va == b.next_u64()) ++eq_seed;
        if (va == c.next_u64()) ++eq_stream;
    }
    REQUIRE(eq_seed == 0);
    REQUIRE(eq_stream == 0);
}

TEST_CASE("u01 lies in [0,1) and has mean near 1/2", "[rng]") {
    Philox rng(7);
    double sum = 0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        double u = rng.u01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    double mean = sum / N;
    // SE of the mean of U(0,1) over 1e5 draws is ~0.0009
    REQUIRE(std::abs(mean - 0.5) < 0.004);
}

TEST_CASE("exponential sampler has the right mean", "[rng]") {
    Philox rng(99);
    const double rate = 2.0;
    const int N = 100000;
    double sum = 0;
    for (int i = 0; i < N; ++i) sum += rng.exponential(rate);
    double mean = sum / N;
    double se = (1.0 / rate) / std::sqrt(double(N));
    REQUIRE(std::abs(mean - 0.5) < 3 * se);
}

TEST_CASE("categorical draws follow the weights", "[rng]") {
    Philox rng(5);
    double w[] = {1.0, 3.0};
    int counts[2] = {0, 0};
    const int N = 100000;
    for (int i = 0; i < N; ++i) ++counts[rng.categorical(w, 2, 4.0)];
    double p1 = double(counts[1]) / N;
    double se = std::sqrt(0.75 * 0.25 / N);
    REQUIRE(std::abs(p1 - 0.75) < 3 * se);
}
