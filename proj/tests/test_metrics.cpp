#include "dmr/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "dmr/rng.hpp"
#include "dmr/synthetic.hpp"
#include "oracles.hpp"

namespace dmr {
namespace {

RankedList ranked_of(const std::vector<ItemId>& items) {
    RankedList r;
    r.items = items;
    for (std::size_t i = 0; i < items.size(); ++i) {
        r.scores.push_back(static_cast<double>(items.size() - i));
    }
    return r;
}

TEST(PrecisionTest, AllTopRelevant) {
    RankedList r = ranked_of({1, 2, 3, 4, 5});
    EXPECT_EQ(precision_at_n(r, {1, 2, 3}, 3), 1.0);
}

TEST(PrecisionTest, NoOverlap) {
    RankedList r = ranked_of({1, 2, 3});
    EXPECT_EQ(precision_at_n(r, {9}, 3), 0.0);
}

TEST(PrecisionTest, ThreeOfFiveHits) {
    RankedList r = ranked_of({1, 2, 3, 4, 5, 6});
    EXPECT_NEAR(precision_at_n(r, {1, 3, 5, 9}, 5), 0.6, 1e-15);
}

TEST(PrecisionTest, EmptyListRejected) {
    RankedList r;
    EXPECT_THROW(precision_at_n(r, {1}, 5), UsageError);
}

TEST(RecallTest, AllRelevantInTop) {
    RankedList r = ranked_of({1, 2, 3, 4});
    EXPECT_EQ(recall_at_n(r, {2, 3}, 4), 1.0);
}

TEST(RecallTest, EmptyIntersection) {
    RankedList r = ranked_of({1, 2});
    EXPECT_EQ(recall_at_n(r, {7, 8}, 2), 0.0);
}

TEST(RecallTest, TwoOfEightRelevant) {
    RankedList r = ranked_of({1, 2, 30, 40});
    EXPECT_NEAR(recall_at_n(r, {1, 2, 11, 12, 13, 14, 15, 16}, 4), 0.25, 1e-15);
}

TEST(F1Test, KnownValues) {
    EXPECT_NEAR(f1_score(0.5, 0.5), 0.5, 1e-15);
    EXPECT_EQ(f1_score(0.0, 0.7), 0.0);
    EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

// Internal-consistency check of the published DMR row: f1(0.323, 0.478)
// agrees with 0.385 in its first three decimals.
TEST(F1Test, PublishedRowConsistency) {
    const double f1 = f1_score(0.323, 0.478);
    EXPECT_NEAR(f1, 0.3855, 1e-3);
    EXPECT_GE(f1, 0.385);
    EXPECT_LT(f1, 0.386);
}

TEST(AucTest, PerfectSeparation) {
    EXPECT_EQ(auc_from_scores({0.9, 0.8}, {0.2, 0.1}), 1.0);
}

TEST(AucTest, AllTiesGiveHalf) {
    EXPECT_EQ(auc_from_scores({0.5, 0.5}, {0.5, 0.5, 0.5}), 0.5);
}

TEST(AucTest, FourPairEnumeration) {
    // pairs: (.9,.5)+ (.9,.1)+ (.4,.5)- (.4,.1)+ => 3/4
    EXPECT_NEAR(auc_from_scores({0.9, 0.4}, {0.5, 0.1}), 0.75, 1e-15);
}

TEST(AucTest, NeedsBothClasses) {
    EXPECT_THROW(auc_from_scores({}, {0.1}), UsageError);
    EXPECT_THROW(auc_from_scores({0.1}, {}), UsageError);
}

TEST(AucPropertyTest, MonotoneTransformInvariance) {
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> pos, neg;
        for (int i = 0; i < 8; ++i) pos.push_back(rng.next_uniform(-2.0, 2.0));
        for (int i = 0; i < 15; ++i) neg.push_back(rng.next_uniform(-2.0, 2.0));
        const double base = auc_from_scores(pos, neg);
        auto transform = [](std::vector<double> v) {
            for (double& x : v) x = std::exp(0.5 * x) + 3.0;  // strictly increasing
            return v;
        };
        EXPECT_NEAR(auc_from_scores(transform(pos), transform(neg)), base, 1e-12);
    }
}

TEST(DiversityTest, AllSameCategoryIsZero) {
    RankedList r = ranked_of({0, 8, 16, 24});
    std::unordered_map<ItemId, std::int32_t> cats;
    for (ItemId i : r.items) cats[i] = 1;
    EXPECT_EQ(diversity_at_n(r, cats, 4), 0.0);
}

TEST(DiversityTest, AllDistinctIsOne) {
    RankedList r = ranked_of({1, 2, 3, 4});
    std::unordered_map<ItemId, std::int32_t> cats = {{1, 0}, {2, 1}, {3, 2}, {4, 3}};
    EXPECT_EQ(diversity_at_n(r, cats, 4), 1.0);
}

TEST(DiversityTest, PairEnumerationOracle) {
    // categories (a, a, b, c): distinct pairs 5 of 6
    RankedList r = ranked_of({1, 2, 3, 4});
    std::unordered_map<ItemId, std::int32_t> cats = {{1, 0}, {2, 0}, {3, 1}, {4, 2}};
    EXPECT_NEAR(diversity_at_n(r, cats, 4), 5.0 / 6.0, 1e-15);
}

TEST(DiversityTest, ErrorsOnBadInput) {
    RankedList r = ranked_of({1, 2});
    std::unordered_map<ItemId, std::int32_t> cats = {{1, 0}};
    EXPECT_THROW(diversity_at_n(r, cats, 1), UsageError);   // n < 2
    EXPECT_THROW(diversity_at_n(r, cats, 2), DataError);    // item 2 unlabeled
}

TEST(DiversityPropertyTest, PermutationInvariance) {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<ItemId> items;
        std::unordered_map<ItemId, std::int32_t> cats;
        for (ItemId i = 0; i < 12; ++i) {
            items.push_back(i);
            cats[i] = static_cast<std::int32_t>(rng.next_below(4));
        }
        RankedList a = ranked_of(items);
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[rng.next_below(i)]);
        }
        RankedList b = ranked_of(items);
        EXPECT_EQ(diversity_at_n(a, cats, 12), diversity_at_n(b, cats, 12));
    }
}

// Brute-force oracle equivalence on random fixtures, all metrics at once.
TEST(MetricOracleTest, RandomFixturesMatchWithin1em12) {
    Rng rng(91);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n_items = 5 + rng.next_below(45);
        RankedList ranked;
        std::set<ItemId> relevant_set;
        std::unordered_set<ItemId> relevant_uset;
        std::unordered_map<ItemId, std::int32_t> cats;
        std::vector<double> scores;
        for (std::size_t i = 0; i < n_items; ++i) {
            ranked.items.push_back(static_cast<ItemId>(i));
            scores.push_back(rng.next_uniform(0.0, 1.0));
            cats[static_cast<ItemId>(i)] = static_cast<std::int32_t>(rng.next_below(5));
            if (rng.next_bernoulli(0.3)) {
                relevant_set.insert(static_cast<ItemId>(i));
                relevant_uset.insert(static_cast<ItemId>(i));
            }
        }
        if (relevant_set.empty() || relevant_set.size() == n_items) continue;
        std::sort(scores.rbegin(), scores.rend());
        ranked.scores = scores;
        const std::size_t n = 2 + rng.next_below(n_items);

        EXPECT_NEAR(precision_at_n(ranked, relevant_uset, n),
                    oracle::precision(ranked.items, relevant_set, n), 1e-12);
        EXPECT_NEAR(recall_at_n(ranked, relevant_uset, n),
                    oracle::recall(ranked.items, relevant_set, n), 1e-12);
        EXPECT_NEAR(diversity_at_n(ranked, cats, n), oracle::diversity(ranked.items, cats, n),
                    1e-12);

        std::vector<double> pos, neg;
        for (std::size_t i = 0; i < n_items; ++i) {
            (relevant_set.count(ranked.items[i]) > 0 ? pos : neg).push_back(ranked.scores[i]);
        }
        EXPECT_NEAR(auc_from_scores(pos, neg), oracle::auc(pos, neg), 1e-12);

        // integer hit-count identities
        const double p = precision_at_n(ranked, relevant_uset, n);
        const double r = recall_at_n(ranked, relevant_uset, n);
        const double hits_from_p = p * static_cast<double>(n);
        const double hits_from_r = r * static_cast<double>(relevant_set.size());
        EXPECT_NEAR(hits_from_p, std::round(hits_from_p), 1e-9);
        EXPECT_NEAR(hits_from_p, hits_from_r, 1e-9);
    }
}

// A scorer that puts every relevant item at +1 and the rest at -1 ranks
// perfectly: AUC 1.0.
TEST(EvaluateTest, PerfectOracleScorerGivesAucOne) {
    std::vector<UserEval> per_user;
    std::unordered_map<ItemId, std::int32_t> cats;
    for (UserId u = 1; u <= 5; ++u) {
        UserEval ue;
        ue.user = u;
        for (ItemId i = 0; i < 20; ++i) {
            const ItemId item = u * 100 + i;
            cats[item] = static_cast<std::int32_t>(i % 3);
            if (i < 4) ue.relevant.insert(item);
            ue.ranked.items.push_back(item);
            ue.ranked.scores.push_back(i < 4 ? 1.0 : -1.0);
        }
        per_user.push_back(std::move(ue));
    }
    EvalReport report = report_from_rankings(per_user, cats, 10);
    EXPECT_EQ(report.auc, 1.0);
    EXPECT_EQ(report.users_evaluated, 5u);
    EXPECT_NEAR(report.recall, 1.0, 1e-15);
}

// Null model: random scores over a large candidate pool average to AUC 0.5
// within 0.05 across 30 seeded trials.
TEST(EvaluateTest, RandomScorerIsANullModel) {
    double total_auc = 0.0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        Rng rng(seed * 7919);
        std::vector<UserEval> per_user;
        std::unordered_map<ItemId, std::int32_t> cats;
        for (UserId u = 1; u <= 10; ++u) {
            UserEval ue;
            ue.user = u;
            std::vector<std::pair<double, ItemId>> scored;
            for (ItemId i = 0; i < 200; ++i) {
                const ItemId item = u * 1000 + i;
                cats[item] = 0;
                if (i < 20) ue.relevant.insert(item);
                scored.emplace_back(rng.next_unit(), item);
            }
            std::sort(scored.rbegin(), scored.rend());
            for (const auto& [score, item] : scored) {
                ue.ranked.items.push_back(item);
                ue.ranked.scores.push_back(score);
            }
            per_user.push_back(std::move(ue));
        }
        total_auc += report_from_rankings(per_user, cats, 50).auc;
    }
    EXPECT_NEAR(total_auc / 30.0, 0.5, 0.05);
}

// Full evaluate() on a synthetic fixture with untrained parameters: every
// aggregate in the report must match a brute-force recomputation from the
// per-user rankings.
TEST(EvaluateTest, ReportMatchesBruteForceRecomputationOnFixture) {
    PlantedWorld world = PlantedWorld::defaults(20, 60, 4, 2, 31);
    world.interactions_per_user = 18;
    SyntheticData data = generate(world);
    ChronoSplit split = chrono_split(data.log, 0.8);
    NeighborParams np;
    np.n_max = 5;
    np.g = 30;
    NeighborIndex index = build_neighbor_index(split.train, np);

    ModelConfig mc;
    mc.dim = 6;
    mc.trends = 2;
    mc.time_scale = 100.0;
    ModelParams params = ModelParams::init(split.train.item_universe(), mc, 31);

    EvalOptions opts;
    opts.n = 10;
    opts.candidate_pool = 30;
    opts.seed = 31;
    EvalDetail detail = evaluate(params, split, index, opts);
    ASSERT_GT(detail.report.users_evaluated, 0u);

    auto categories = split.train.category_map();
    for (const auto& [item, cat] : split.test.category_map()) categories.emplace(item, cat);

    double sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0, sum_auc = 0.0, sum_div = 0.0;
    std::size_t users = 0;
    for (const auto& ue : detail.per_user) {
        if (ue.relevant.empty() || ue.ranked.items.empty()) continue;
        std::set<ItemId> relevant(ue.relevant.begin(), ue.relevant.end());
        std::vector<double> pos, neg;
        for (std::size_t i = 0; i < ue.ranked.items.size(); ++i) {
            (relevant.count(ue.ranked.items[i]) > 0 ? pos : neg).push_back(ue.ranked.scores[i]);
        }
        if (pos.empty() || neg.empty()) continue;
        const double p = oracle::precision(ue.ranked.items, relevant, opts.n);
        const double r = oracle::recall(ue.ranked.items, relevant, opts.n);
        sum_p += p;
        sum_r += r;
        sum_f1 += oracle::f1(p, r);
        sum_auc += oracle::auc(pos, neg);
        sum_div += oracle::diversity(ue.ranked.items, categories, opts.n);
        ++users;
    }
    ASSERT_EQ(users, detail.report.users_evaluated);
    const double inv = 1.0 / static_cast<double>(users);
    EXPECT_NEAR(detail.report.precision, sum_p * inv, 1e-12);
    EXPECT_NEAR(detail.report.recall, sum_r * inv, 1e-12);
    EXPECT_NEAR(detail.report.f1, sum_f1 * inv, 1e-12);
    EXPECT_NEAR(detail.report.auc, sum_auc * inv, 1e-12);
    EXPECT_NEAR(detail.report.diversity, sum_div * inv, 1e-12);

    // rankings are well-formed: unique items, non-increasing scores
    for (const auto& ue : detail.per_user) {
        std::set<ItemId> seen;
        for (std::size_t i = 0; i < ue.ranked.items.size(); ++i) {
            EXPECT_TRUE(seen.insert(ue.ranked.items[i]).second);
            if (i > 0) EXPECT_GE(ue.ranked.scores[i - 1], ue.ranked.scores[i]);
        }
    }
}

}  // namespace
}  // namespace dmr
