#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "prw/rng.hpp"

using prw::RandomStream;

TEST_CASE("philox 4x32-10 known-answer vectors") {
    // counter 0, key 0
    RandomStream s(0, 0);
    CHECK(s.next_u64() == 0xe169c58d6627e8d5ull);
    CHECK(s.next_u64() == 0x9b00dbd8bc57ac4cull);
}

TEST_CASE("streams are deterministic and reconstructible") {
    RandomStream a(42, 7);
    RandomStream b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RandomStream c(42, 7);
    const double first = c.next_unit();
    RandomStream d = RandomStream(42, 0).substream(7);
    CHECK(d.next_unit() == first);
}

TEST_CASE("distinct substreams produce distinct output") {
    RandomStream root(9001, 0);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        RandomStream s = root.substream(i);
        firsts.insert(s.next_u64());
    }
    CHECK(firsts.size() == 1000);
}

TEST_CASE("unit variates live strictly inside (0,1) and look uniform") {
    RandomStream s(123, 0);
    double sum = 0.0;
    double min_seen = 1.0, max_seen = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.next_unit();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        sum += u;
        min_seen = std::min(min_seen, u);
        max_seen = std::max(max_seen, u);
    }
    const double mean = sum / n;
    const double se = std::sqrt(1.0 / 12.0 / n);
    CHECK(std::abs(mean - 0.5) < 4.0 * se);
    CHECK(min_seen < 0.001);
    CHECK(max_seen > 0.999);
}

TEST_CASE("polar normal sampler has the right first two moments") {
    RandomStream s(77, 0);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.next_normal();
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}
