#include <gtest/gtest.h>

#include <set>

#include "dchain/random.hpp"

using namespace dchain;

TEST(RandomSource, SameSeedSameSequence) {
    RandomSource a(42);
    RandomSource b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(RandomSource, StreamsDiffer) {
    RandomSource a(42, 0);
    RandomSource b(42, 1);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a.next() == b.next();
    EXPECT_EQ(equal, 0);
}

TEST(RandomSource, UniformIndexInRangeAndCoversAll) {
    RandomSource rng(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto x = rng.uniform_index(7);
        ASSERT_LT(x, 7u);
        seen.insert(x);
    }
    EXPECT_EQ(seen.size(), 7u);
}

TEST(RandomSource, Uniform01Mean) {
    RandomSource rng(2);
    double total = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        total += u;
    }
    EXPECT_NEAR(total / 100000.0, 0.5, 0.005);
}

TEST(RandomSource, GeometricSupportAndMean) {
    RandomSource rng(3);
    EXPECT_EQ(rng.geometric(1.0), 1u);
    double total = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const auto w = rng.geometric(0.25);
        ASSERT_GE(w, 1u);
        total += static_cast<double>(w);
    }
    EXPECT_NEAR(total / 100000.0, 4.0, 0.06);
}

TEST(RandomSource, SplitIsIndependentAndDeterministic) {
    RandomSource a(5);
    RandomSource b(5);
    RandomSource sa = a.split();
    RandomSource sb = b.split();
    EXPECT_EQ(sa.next(), sb.next());
    EXPECT_NE(sa.next(), a.next());
}
