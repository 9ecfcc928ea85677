#include "mal/error.hpp"
#include "mal/rearrangement.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mal;
using namespace mal::testing;

TEST(StepFunction, ValidatesOrderingAndEvaluatesLeftContinuously) {
    EXPECT_THROW(StepFunction({0.0, 0.5, 0.4}, {2.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(StepFunction({0.0, 0.5, 1.0}, {1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(StepFunction({0.1, 1.0}, {1.0}), std::invalid_argument);
    const StepFunction f({0.0, 0.3, 1.0}, {3.0, 1.0});
    EXPECT_EQ(f(0.3), 3.0);
    EXPECT_EQ(f(0.30001), 1.0);
    EXPECT_EQ(f(0.0), 3.0);
    EXPECT_EQ(f(2.0), 1.0);
    EXPECT_DOUBLE_EQ(f.integral(), 0.3 * 3.0 + 0.7);
}

TEST(DecreasingRearrangement, ConstantIsOneStep) {
    const StepFunction f = decreasing_rearrangement(WeightedValues({2.0, 2.0, 2.0}, {0.2, 0.5, 0.3}));
    ASSERT_EQ(f.steps(), 1u);
    EXPECT_EQ(f.levels()[0], 2.0);
    EXPECT_DOUBLE_EQ(f.total_mass(), 1.0);
}

TEST(DecreasingRearrangement, SortsByValueWithCumulativeWeights) {
    const StepFunction f = decreasing_rearrangement(WeightedValues({1.0, 3.0, 2.0}, {0.5, 0.3, 0.2}));
    ASSERT_EQ(f.steps(), 3u);
    EXPECT_EQ(f.levels()[0], 3.0);
    EXPECT_EQ(f.levels()[1], 2.0);
    EXPECT_EQ(f.levels()[2], 1.0);
    EXPECT_DOUBLE_EQ(f.breakpoints()[1], 0.3);
    EXPECT_DOUBLE_EQ(f.breakpoints()[2], 0.5);
    EXPECT_DOUBLE_EQ(f.breakpoints()[3], 1.0);
}

TEST(DecreasingRearrangement, PermutationInvariantForEqualWeights) {
    const std::vector<double> w(4, 0.25);
    EXPECT_EQ(decreasing_rearrangement(WeightedValues({4, 1, 3, 2}, w)),
              decreasing_rearrangement(WeightedValues({2, 3, 1, 4}, w)));
}

TEST(Equidistributed, SpecExamples) {
    const WeightedValues a({1.0, 2.0}, {0.5, 0.5});
    EXPECT_TRUE(equidistributed(a, a));
    EXPECT_TRUE(equidistributed(a, WeightedValues({2.0, 1.0}, {0.5, 0.5})));
    EXPECT_FALSE(equidistributed(WeightedValues({1.0, 2.0}, {0.7, 0.3}), a));
    EXPECT_THROW(equidistributed(a, WeightedValues({1.0}, {2.0})), MassMismatch);
}

TEST(ThetaMap, AssignsIntervalsByDescendingValue) {
    const ThetaMap single = theta_map(WeightedValues({5.0}, {1.0}));
    EXPECT_EQ(single.ordering, std::vector<std::size_t>{0});
    EXPECT_EQ(single.interval_bounds, (std::vector<double>{0.0, 1.0}));

    const WeightedValues wv({1.0, 3.0, 3.0, 2.0}, {0.25, 0.25, 0.25, 0.25});
    const ThetaMap t = theta_map(wv);
    EXPECT_EQ(t.ordering, (std::vector<std::size_t>{1, 2, 3, 0}));
    EXPECT_EQ(theta_map(wv).interval_bounds, t.interval_bounds);
    const WeightedValues back = pull_back(decreasing_rearrangement(wv), t, wv);
    EXPECT_TRUE(equidistributed(back, wv, 0.0));
}

TEST(SimilarlyOrdered, SpecExamples) {
    const std::vector<double> g{1, 2, 3};
    EXPECT_TRUE(similarly_ordered(g, std::vector<double>{5, 5, 7}));
    EXPECT_TRUE(similarly_ordered(g, std::vector<double>{4, 4, 4}));
    EXPECT_FALSE(similarly_ordered(std::vector<double>{1, 2}, std::vector<double>{2, 1}));
    EXPECT_THROW(similarly_ordered(g, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(HardyLittlewood, SpecExamples) {
    const WeightedValues eta({5.0, 4.0, 6.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const StepFunction f0 = decreasing_rearrangement(WeightedValues({0.0, 1.0, 2.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
    EXPECT_NEAR(hardy_littlewood_sup(f0, eta), 17.0 / 3.0, 1e-14);
    EXPECT_NEAR(hardy_littlewood_sup(StepFunction::constant(1.0), eta), 5.0, 1e-14);
    EXPECT_NEAR(hardy_littlewood_sup(f0, WeightedValues({1.0, 1.0}, {0.5, 0.5})), f0.integral(), 1e-14);
    EXPECT_THROW(hardy_littlewood_sup(StepFunction::constant(1.0, 2.0), eta), MassMismatch);
}

TEST(Transfer, PreservesDistributionAcrossPotentials) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const SmallSet a = random_small_set(rng, 8, 5, 16);
        const SmallSet b = random_small_set(rng, 8, 5, 16);
        const StepFunction f = decreasing_rearrangement(a.weighted());
        const TransferredValues moved = transfer(f, theta_map(b.weighted()));
        EXPECT_TRUE(equidistributed(moved.values, a.weighted(), 1e-12));
        EXPECT_EQ(moved.owner.size(), moved.values.size());
    }
}

TEST(Oracles, RandomSmallSetsAgree) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const SmallSet a = random_small_set(rng, 8, 4, 8);
        const SmallSet b = random_small_set(rng, 8, 4, 8);
        EXPECT_EQ(decreasing_rearrangement(a.weighted()), sorted_rearrangement(a));
        EXPECT_EQ(equidistributed(a.weighted(), b.weighted(), 0.0), same_distribution(a, b));
        const SmallSet f0 = random_small_set(rng, 6, 4, 6);
        const SmallSet eta = random_small_set(rng, 6, 4, 6);
        EXPECT_NEAR(hardy_littlewood_sup(decreasing_rearrangement(f0.weighted()), eta.weighted()),
                    permutation_pairing_max(f0, eta), 1e-12);
    }
}

TEST(RearrangementDistance, ZeroIffEquidistributed) {
    const StepFunction a = decreasing_rearrangement(WeightedValues({1.0, 2.0}, {0.5, 0.5}));
    const StepFunction b = decreasing_rearrangement(WeightedValues({2.0, 1.0}, {0.5, 0.5}));
    const StepFunction c = decreasing_rearrangement(WeightedValues({1.0, 2.0}, {0.75, 0.25}));
    EXPECT_EQ(rearrangement_distance(a, b), 0.0);
    EXPECT_DOUBLE_EQ(rearrangement_distance(a, c), 0.25);
}
