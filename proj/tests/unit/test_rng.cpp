#include <set>

#include "doctest.h"
#include "rcsim/rng.hpp"

using rcsim::Rng;

TEST_CASE("streams are deterministic and named streams differ") {
    Rng a = Rng::stream(42, "sampling");
    Rng b = Rng::stream(42, "sampling");
    Rng c = Rng::stream(42, "shuffle");
    bool all_equal = true;
    bool any_cross_equal = true;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_cross_equal = any_cross_equal && va == c.next_u64();
    }
    CHECK(all_equal);
    CHECK_FALSE(any_cross_equal);
}

TEST_CASE("uniform stays in [0,1) and normal has sane moments") {
    Rng rng(7);
    double sum = 0.0, sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("sample_indices draws distinct ascending indices") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto idx = rng.sample_indices(20, 7);
        REQUIRE(idx.size() == 7);
        std::set<std::size_t> seen(idx.begin(), idx.end());
        CHECK(seen.size() == 7);
        CHECK(std::is_sorted(idx.begin(), idx.end()));
        CHECK(*idx.rbegin() < 20);
    }
    CHECK(rng.sample_indices(3, 10).size() == 3);  // k capped at n
    CHECK(rng.sample_indices(5, 0).empty());
}
