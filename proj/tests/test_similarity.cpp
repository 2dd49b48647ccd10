#include "dmr/similarity.hpp"

#include <gtest/gtest.h>

#include "dmr/io.hpp"
#include "dmr/rng.hpp"
#include "oracles.hpp"

namespace dmr {
namespace {

UserHistory history_of(UserId user, const std::vector<std::pair<ItemId, bool>>& events) {
    UserHistory h;
    h.user = user;
    Timestamp ts = 0;
    for (const auto& [item, click] : events) {
        h.interactions.push_back({item, ++ts, click, -1});
    }
    h.normalize();
    return h;
}

TEST(PccTest, IdenticalMixedVectorsGivePerfectCorrelation) {
    // Identical click levels with nonzero variance over 3 common items.
    UserHistory a = history_of(1, {{10, true}, {11, false}, {12, true}});
    UserHistory b = history_of(2, {{10, true}, {11, false}, {12, true}});
    SimilarityScore s = pcc_similarity(a, b);
    ASSERT_TRUE(s.defined);
    EXPECT_NEAR(s.raw, 1.0, 1e-15);
    EXPECT_NEAR(s.mapped, 1.0, 1e-15);
    EXPECT_EQ(s.common_items, 3u);
}

TEST(PccTest, OppositeDeviationsGivePerfectAnticorrelation) {
    UserHistory a = history_of(1, {{10, true}, {11, false}});
    UserHistory b = history_of(2, {{10, false}, {11, true}});
    SimilarityScore s = pcc_similarity(a, b);
    ASSERT_TRUE(s.defined);
    EXPECT_NEAR(s.raw, -1.0, 1e-15);
    EXPECT_NEAR(s.mapped, 0.0, 1e-15);
}

// Hand evaluation of the correlation formula: i=(1,0,1), j=(1,1,0) has
// means 2/3, covariance -1/3, variances 2/3 each, so raw = -0.5.
TEST(PccTest, HandComputedMixedCase) {
    UserHistory a = history_of(1, {{10, true}, {11, false}, {12, true}});
    UserHistory b = history_of(2, {{10, true}, {11, true}, {12, false}});
    SimilarityScore s = pcc_similarity(a, b);
    ASSERT_TRUE(s.defined);
    EXPECT_NEAR(s.raw, -0.5, 1e-12);
    EXPECT_NEAR(s.mapped, 0.25, 1e-12);
}

TEST(PccTest, UndefinedWithoutCommonItems) {
    UserHistory a = history_of(1, {{10, true}});
    UserHistory b = history_of(2, {{20, true}});
    EXPECT_FALSE(pcc_similarity(a, b).defined);
}

TEST(PccTest, UndefinedOnZeroVariance) {
    // b's levels over the common set are constant.
    UserHistory a = history_of(1, {{10, true}, {11, false}});
    UserHistory b = history_of(2, {{10, true}, {11, true}});
    SimilarityScore s = pcc_similarity(a, b);
    EXPECT_FALSE(s.defined);
    EXPECT_EQ(s.common_items, 2u);
}

TEST(PccTest, RepeatedInteractionsCollapseToEverClicked) {
    UserHistory a;
    a.user = 1;
    a.interactions = {{10, 1, false, -1}, {10, 5, true, -1}, {11, 2, false, -1}};
    a.normalize();
    auto levels = click_levels(a);
    ASSERT_EQ(levels.size(), 2u);
    EXPECT_EQ(levels[0].second, 1.0);  // item 10 was clicked once
    EXPECT_EQ(levels[1].second, 0.0);
}

TEST(PccPropertyTest, SymmetryAndRangeOnRandomHistories) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        auto random_history = [&](UserId u) {
            std::vector<std::pair<ItemId, bool>> events;
            const std::size_t n = 1 + rng.next_below(12);
            for (std::size_t i = 0; i < n; ++i) {
                events.emplace_back(static_cast<ItemId>(rng.next_below(15)),
                                    rng.next_bernoulli(0.5));
            }
            return history_of(u, events);
        };
        UserHistory a = random_history(1);
        UserHistory b = random_history(2);
        SimilarityScore ab = pcc_similarity(a, b);
        SimilarityScore ba = pcc_similarity(b, a);
        EXPECT_EQ(ab.defined, ba.defined);
        EXPECT_EQ(ab.common_items, ba.common_items);
        if (ab.defined) {
            EXPECT_NEAR(ab.raw, ba.raw, 1e-12);
            EXPECT_GE(ab.mapped, 0.0);
            EXPECT_LE(ab.mapped, 1.0);
            EXPECT_NEAR(ab.mapped, (ab.raw + 1.0) / 2.0, 1e-15);
        }

        oracle::PccResult ref = oracle::pcc(a, b);
        EXPECT_EQ(ab.defined, ref.defined);
        if (ab.defined) EXPECT_NEAR(ab.raw, ref.raw, 1e-12);
    }
}

TEST(PccPropertyTest, ShiftInvarianceOnRealLevels) {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.next_below(10);
        std::vector<double> a(n), b(n), a_shifted(n), b_shifted(n);
        const double shift = rng.next_uniform(-5.0, 5.0);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.next_uniform(-1.0, 1.0);
            b[i] = rng.next_uniform(-1.0, 1.0);
            a_shifted[i] = a[i] + shift;
            b_shifted[i] = b[i] + shift;
        }
        SimilarityScore s0 = pcc_from_levels(a, b);
        SimilarityScore s1 = pcc_from_levels(a_shifted, b_shifted);
        ASSERT_EQ(s0.defined, s1.defined);
        if (s0.defined) EXPECT_NEAR(s0.raw, s1.raw, 1e-9);
    }
}

TEST(OverlapTest, MatchesClosedForm) {
    UserHistory a = history_of(1, {{1, true}, {2, false}, {3, true}, {4, true}});
    UserHistory b = history_of(2, {{3, false}, {4, true}});
    SimilarityScore s = overlap_similarity(a, b);
    ASSERT_TRUE(s.defined);
    EXPECT_EQ(s.common_items, 2u);
    EXPECT_NEAR(s.mapped, 2.0 / std::sqrt(4.0 * 2.0), 1e-15);
    EXPECT_NEAR(s.mapped, (s.raw + 1.0) / 2.0, 1e-15);
}

TEST(OverlapTest, KindSelection) {
    EXPECT_EQ(similarity_kind_from_name("pcc"), SimilarityKind::pcc);
    EXPECT_EQ(similarity_kind_from_name("overlap"), SimilarityKind::overlap);
    EXPECT_THROW(similarity_kind_from_name("cosine"), UsageError);
}

}  // namespace
}  // namespace dmr
