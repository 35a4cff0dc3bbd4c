#include <cmath>
#include <set>

#include <doctest.h>

#include "lil/rng.hpp"
#include "testutil.hpp"

using namespace lil;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors for the 10-round philox4x32 cipher.
    auto out0 = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out0[0] == 0x6627e8d5u);
    CHECK(out0[1] == 0xe169c58du);
    CHECK(out0[2] == 0xbc57ac4cu);
    CHECK(out0[3] == 0x9b00dbd8u);

    auto out1 = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                           {0xffffffffu, 0xffffffffu});
    CHECK(out1[0] == 0x408f276du);
    CHECK(out1[1] == 0x41c83b0eu);
    CHECK(out1[2] == 0xa20bc7c6u);
    CHECK(out1[3] == 0x6d5451fdu);

    auto out2 = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                           {0xa4093822u, 0x299f31d0u});
    CHECK(out2[0] == 0xd16cfe09u);
    CHECK(out2[1] == 0x94fdccebu);
    CHECK(out2[2] == 0x5001e420u);
    CHECK(out2[3] == 0x24126ea1u);
}

TEST_CASE("streams are deterministic and index-addressable") {
    PathRng a(42, 7);
    PathRng b(42, 7);
    for (uint64_t i : {0ull, 1ull, 5ull, 1000000ull}) {
        CHECK(a.uniform_pair(i) == b.uniform_pair(i));
        CHECK(a.normal_pair(i) == b.normal_pair(i));
    }
    // init space is disjoint from step space
    CHECK(a.uniform_pair(3, true) != a.uniform_pair(3, false));
}

TEST_CASE("distinct paths and seeds give distinct draws") {
    std::set<uint64_t> seen;
    for (uint64_t seed : {1ull, 2ull}) {
        for (uint64_t path = 0; path < 4; ++path) {
            PathRng rng(seed, path);
            auto u = rng.uniform_pair(0);
            seen.insert(static_cast<uint64_t>(u[0] * 9.007199254740992e15));
        }
    }
    CHECK(seen.size() == 8);
}

TEST_CASE("uniforms live in [0,1)") {
    PathRng rng(123, 0);
    for (uint64_t i = 0; i < 10000; ++i) {
        auto u = rng.uniform_pair(i);
        CHECK(u[0] >= 0.0);
        CHECK(u[0] < 1.0);
        CHECK(u[1] >= 0.0);
        CHECK(u[1] < 1.0);
    }
}

TEST_CASE("normal draws pass a KS normality test across seeds") {
    int passed = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        PathRng rng(seed, 0);
        std::vector<double> sample;
        sample.reserve(100000);
        for (uint64_t i = 0; i < 50000; ++i) {
            auto z = rng.normal_pair(i);
            sample.push_back(z[0]);
            sample.push_back(z[1]);
        }
        double p = testutil::ks_test_pvalue(std::move(sample), [](double x) {
            return testutil::normal_cdf(x);
        });
        if (p > 0.01) ++passed;
    }
    CHECK(passed >= 9);
}

TEST_CASE("normal moments") {
    PathRng rng(99, 3);
    std::vector<double> sample;
    for (uint64_t i = 0; i < 100000; ++i) {
        auto z = rng.normal_pair(i);
        sample.push_back(z[0]);
        sample.push_back(z[1]);
    }
    CHECK(std::abs(testutil::mean(sample)) < 0.01);
    CHECK(std::abs(testutil::sample_variance(sample) - 1.0) < 0.02);
}
