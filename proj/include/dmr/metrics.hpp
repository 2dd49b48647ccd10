#pragma once

#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dmr/model.hpp"
#include "dmr/neighbor_index.hpp"
#include "dmr/split.hpp"
#include "dmr/types.hpp"

namespace dmr {

/// Items of one user ordered by descending score (ties by item id ascending).
struct RankedList {
    UserId user = 0;
    std::vector<ItemId> items;
    std::vector<double> scores;  // parallel to items, non-increasing
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double diversity = 0.0;  // NaN when categories are unavailable
    std::size_t n = 0;
    std::size_t users_evaluated = 0;
};

/// |top-n ^ relevant| / n.
double precision_at_n(const RankedList& ranked, const std::unordered_set<ItemId>& relevant,
                      std::size_t n);

/// |top-n ^ relevant| / |relevant|.
double recall_at_n(const RankedList& ranked, const std::unordered_set<ItemId>& relevant,
                   std::size_t n);

/// 2pr / (p + r), zero when p + r == 0.
double f1_score(double precision, double recall);

/// Fraction of (positive, negative) score pairs ranked correctly, ties 0.5.
/// Rank-based; the tests check it against direct pair enumeration.
double auc_from_scores(const std::vector<double>& positives, const std::vector<double>& negatives);

/// Average fraction of category-distinct pairs in the top-n. Throws on n < 2
/// or an unlabeled item.
double diversity_at_n(const RankedList& ranked,
                      const std::unordered_map<ItemId, std::int32_t>& categories, std::size_t n);

struct EvalOptions {
    std::size_t n = 50;               // ranking cutoff
    std::size_t candidate_pool = 100; // sampled unobserved items per user
    std::uint64_t seed = 1;           // drives candidate sampling
};

/// One evaluated user: the scored candidate ranking plus the clicked
/// test-period items it is judged against.
struct UserEval {
    UserId user = 0;
    RankedList ranked;
    std::unordered_set<ItemId> relevant;
};

struct EvalDetail {
    EvalReport report;
    std::vector<UserEval> per_user;
};

/// Candidate items per kept test user: the user's test-period items plus
/// uniformly sampled unobserved items, deterministic in the seed.
std::vector<std::pair<UserId, std::vector<ItemId>>> build_candidate_pools(
    const ChronoSplit& split, const std::vector<ItemId>& universe, const EvalOptions& opts);

/// Scores every candidate with the model (query time = the user's last train
/// interaction), ranks, and macro-averages the metric suite over users.
EvalDetail evaluate(const ModelParams& params, const ChronoSplit& split,
                    const NeighborIndex& index, const EvalOptions& opts,
                    std::size_t future_cap = 100);

/// Metric suite over externally produced rankings (shared by the model path
/// and the popularity baseline).
EvalReport report_from_rankings(const std::vector<UserEval>& per_user,
                                const std::unordered_map<ItemId, std::int32_t>& categories,
                                std::size_t n);

}  // namespace dmr
