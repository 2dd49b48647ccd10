#include "dmr/split.hpp"

#include <gtest/gtest.h>

#include "dmr/io.hpp"
#include "dmr/rng.hpp"

namespace dmr {
namespace {

InteractionLog log_with_counts(const std::vector<std::pair<UserId, std::size_t>>& users) {
    InteractionLog log;
    for (const auto& [user, n] : users) {
        for (std::size_t i = 0; i < n; ++i) {
            log.add(user, {static_cast<ItemId>(i), static_cast<Timestamp>(10 * (i + 1)),
                           (i % 2) == 0, -1});
        }
    }
    log.finalize();
    return log;
}

TEST(ChronoSplitTest, TenInteractionsAtPoint8) {
    InteractionLog log = log_with_counts({{1, 10}});
    ChronoSplit split = chrono_split(log, 0.8);
    EXPECT_EQ(split.train.at(1).interactions.size(), 8u);
    EXPECT_EQ(split.test.at(1).interactions.size(), 2u);
    EXPECT_EQ(split.dropped_users, 0u);
}

TEST(ChronoSplitTest, SingleInteractionUserIsDropped) {
    InteractionLog log = log_with_counts({{1, 1}, {2, 5}});
    ChronoSplit split = chrono_split(log, 0.8);
    EXPECT_EQ(split.dropped_users, 1u);
    EXPECT_EQ(split.train.find(1), nullptr);
    EXPECT_NE(split.train.find(2), nullptr);
}

TEST(ChronoSplitTest, FractionOutOfRangeRejected) {
    InteractionLog log = log_with_counts({{1, 4}});
    EXPECT_THROW(chrono_split(log, 0.0), UsageError);
    EXPECT_THROW(chrono_split(log, 1.0), UsageError);
    EXPECT_THROW(chrono_split(log, -0.3), UsageError);
}

// Independent recomputation of ceil(fraction * n) with integer arithmetic for
// tenth-valued fractions.
TEST(ChronoSplitTest, SizesMatchIntegerCeilOracle) {
    InteractionLog log = log_with_counts({{1, 10}, {2, 7}, {3, 13}});
    const double fraction = 0.7;
    ChronoSplit split = chrono_split(log, fraction);
    for (UserId u : {1, 2, 3}) {
        const std::size_t n = log.at(u).interactions.size();
        const std::size_t expected_train = (7 * n + 9) / 10;  // ceil(7n/10)
        EXPECT_EQ(split.train.at(u).interactions.size(), expected_train) << "user " << u;
        EXPECT_EQ(split.test.at(u).interactions.size(), n - expected_train) << "user " << u;
    }
}

TEST(ChronoSplitTest, TestNeverPrecedesTrainAndPartitionHolds) {
    Rng rng(42);
    InteractionLog log;
    for (UserId u = 1; u <= 20; ++u) {
        const std::size_t n = 1 + rng.next_below(12);
        Timestamp ts = 0;
        for (std::size_t i = 0; i < n; ++i) {
            ts += 1 + static_cast<Timestamp>(rng.next_below(5));
            log.add(u, {static_cast<ItemId>(rng.next_below(50)), ts, rng.next_bernoulli(0.5), -1});
        }
    }
    log.finalize();

    ChronoSplit split = chrono_split(log, 0.6);
    std::size_t dropped_interactions = 0;
    for (const auto& u : log.users()) {
        if (split.train.find(u.user) == nullptr) dropped_interactions += u.interactions.size();
    }
    EXPECT_EQ(split.train.interaction_count() + split.test.interaction_count() +
                  dropped_interactions,
              log.interaction_count());

    for (const auto& u : split.test.users()) {
        const auto& train_hist = split.train.at(u.user);
        EXPECT_LE(train_hist.interactions.back().timestamp, u.interactions.front().timestamp);
        EXPECT_EQ(split.train_boundary.at(u.user), train_hist.interactions.back().timestamp);
    }
}

TEST(SplitFromLogsTest, RebuildsBoundariesAndChecksOrder) {
    InteractionLog log = log_with_counts({{1, 10}});
    ChronoSplit split = chrono_split(log, 0.8);
    ChronoSplit rebuilt = split_from_logs(split.train, split.test);
    EXPECT_EQ(rebuilt.train_boundary.at(1), split.train_boundary.at(1));

    InteractionLog bad_test = parse_log_text("1,99,5,1\n");  // earlier than any train entry
    EXPECT_THROW(split_from_logs(split.train, bad_test), DataError);
}

}  // namespace
}  // namespace dmr
