#include "dmr/future_sequence.hpp"

#include <gtest/gtest.h>

#include "dmr/rng.hpp"

namespace dmr {
namespace {

// Oracle: filter each neighbor's interactions by timestamp >= query and merge
// by (timestamp, neighbor rank, item).
std::vector<FutureEntry> filter_and_merge(UserId user, const NeighborIndex& index,
                                          const InteractionLog& log, std::size_t cap) {
    const auto& own = log.at(user).interactions;
    const std::size_t k = index.params.k;
    const Timestamp query_ts = own[own.size() > k ? own.size() - k : 0].timestamp;

    std::vector<std::tuple<Timestamp, std::size_t, ItemId, bool, UserId>> rows;
    const auto& neighbors = index.neighbors_of(user);
    for (std::size_t rank = 0; rank < neighbors.size(); ++rank) {
        const auto& hist = log.at(neighbors[rank].neighbor).interactions;
        std::size_t taken = 0;
        for (const auto& x : hist) {
            if (x.timestamp >= query_ts && taken < cap) {
                rows.emplace_back(x.timestamp, rank, x.item, x.click, neighbors[rank].neighbor);
                ++taken;
            }
        }
    }
    std::sort(rows.begin(), rows.end());
    std::vector<FutureEntry> out;
    for (const auto& [ts, rank, item, click, source] : rows) {
        out.push_back({item, ts, click, source});
    }
    return out;
}

InteractionLog toy_log() {
    InteractionLog log;
    // user 1: two interactions, query item at ts 20
    log.add(1, {10, 10, true, -1});
    log.add(1, {11, 20, true, -1});
    // neighbor 2: interleaved around the query timestamp
    log.add(2, {10, 5, true, -1});
    log.add(2, {12, 22, false, -1});
    log.add(2, {13, 25, true, -1});
    // neighbor 3: everything before the query timestamp
    log.add(3, {11, 4, true, -1});
    log.add(3, {14, 6, false, -1});
    // neighbor 4: same timestamps as 2's tail
    log.add(4, {11, 22, true, -1});
    log.add(4, {15, 30, false, -1});
    log.finalize();
    return log;
}

NeighborIndex hand_index() {
    NeighborIndex index;
    index.params.k = 1;
    index.lists[1] = {{2, {0.8, 0.9, 2, true}}, {4, {0.6, 0.8, 1, true}}, {3, {0.2, 0.6, 1, true}}};
    index.lists[2] = {};
    return index;
}

TEST(FutureSequenceTest, NeighborEntirelyInThePastContributesNothing) {
    InteractionLog log = toy_log();
    NeighborIndex index;
    index.params.k = 1;
    index.lists[1] = {{3, {0.5, 0.75, 1, true}}};
    FutureSequence fs = extract_future_sequence(1, index, log, 100);
    EXPECT_TRUE(fs.entries.empty());
}

TEST(FutureSequenceTest, EmptyNeighborListGivesEmptySequence) {
    InteractionLog log = toy_log();
    NeighborIndex index = hand_index();
    FutureSequence fs = extract_future_sequence(2, index, log, 100);
    EXPECT_TRUE(fs.entries.empty());
}

TEST(FutureSequenceTest, UserAbsentFromIndexIsAnError) {
    InteractionLog log = toy_log();
    NeighborIndex index = hand_index();
    EXPECT_THROW(extract_future_sequence(99, index, log, 100), DataError);
}

TEST(FutureSequenceTest, InterleavedNeighborsMatchFilterAndMergeOracle) {
    InteractionLog log = toy_log();
    NeighborIndex index = hand_index();
    FutureSequence fs = extract_future_sequence(1, index, log, 100);

    const auto expected = filter_and_merge(1, index, log, 100);
    ASSERT_EQ(fs.entries.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(fs.entries[i].item, expected[i].item);
        EXPECT_EQ(fs.entries[i].timestamp, expected[i].timestamp);
        EXPECT_EQ(fs.entries[i].click, expected[i].click);
        EXPECT_EQ(fs.entries[i].source, expected[i].source);
    }
    // query ts is 20: neighbor 2 contributes items 12/13, neighbor 4 both of its rows
    ASSERT_EQ(fs.entries.size(), 4u);
    EXPECT_EQ(fs.entries[0].item, 12);  // ts 22, rank 0 beats rank 1
    EXPECT_EQ(fs.entries[1].item, 11);
}

TEST(FutureSequenceTest, PerNeighborCapKeepsEarliestEntries) {
    InteractionLog log = toy_log();
    NeighborIndex index = hand_index();
    FutureSequence fs = extract_future_sequence(1, index, log, 1);
    const auto expected = filter_and_merge(1, index, log, 1);
    ASSERT_EQ(fs.entries.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(fs.entries[i].item, expected[i].item);
    }
    EXPECT_EQ(fs.entries.size(), 2u);  // one entry per contributing neighbor
}

TEST(FutureSequenceTest, RandomLogsStayOrderedAndMatchOracle) {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        InteractionLog log;
        const std::size_t n_users = 4 + rng.next_below(6);
        for (UserId u = 1; u <= static_cast<UserId>(n_users); ++u) {
            Timestamp ts = 0;
            const std::size_t n = 2 + rng.next_below(10);
            for (std::size_t i = 0; i < n; ++i) {
                ts += 1 + static_cast<Timestamp>(rng.next_below(3));
                log.add(u, {static_cast<ItemId>(rng.next_below(10)), ts,
                            rng.next_bernoulli(0.5), -1});
            }
        }
        log.finalize();

        NeighborIndex index;
        index.params.k = 1 + rng.next_below(2);
        for (const auto& u : log.users()) {
            auto& list = index.lists[u.user];
            for (const auto& v : log.users()) {
                if (v.user != u.user && rng.next_bernoulli(0.4)) {
                    list.push_back({v.user, {0.0, rng.next_unit(), 2, true}});
                }
            }
        }

        const std::size_t cap = 1 + rng.next_below(5);
        for (const auto& u : log.users()) {
            FutureSequence fs = extract_future_sequence(u.user, index, log, cap);
            const auto expected = filter_and_merge(u.user, index, log, cap);
            ASSERT_EQ(fs.entries.size(), expected.size());
            for (std::size_t i = 0; i < expected.size(); ++i) {
                EXPECT_EQ(fs.entries[i].item, expected[i].item);
                EXPECT_EQ(fs.entries[i].source, expected[i].source);
            }
            for (std::size_t i = 1; i < fs.entries.size(); ++i) {
                EXPECT_LE(fs.entries[i - 1].timestamp, fs.entries[i].timestamp);
            }
            const Timestamp query_ts =
                query_timestamp(log.at(u.user), index.params.k);
            for (const auto& e : fs.entries) EXPECT_GE(e.timestamp, query_ts);
        }
    }
}

}  // namespace
}  // namespace dmr
