#include "dmr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dmr/rng.hpp"

namespace dmr {

namespace {

std::size_t hit_count(const RankedList& ranked, const std::unordered_set<ItemId>& relevant,
                      std::size_t n) {
    if (ranked.items.empty()) throw UsageError("ranked list is empty");
    const std::size_t top = std::min(n, ranked.items.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < top; ++i) {
        if (relevant.count(ranked.items[i]) > 0) ++hits;
    }
    return hits;
}

}  // namespace

double precision_at_n(const RankedList& ranked, const std::unordered_set<ItemId>& relevant,
                      std::size_t n) {
    if (n < 1) throw UsageError("precision cutoff must be >= 1");
    return static_cast<double>(hit_count(ranked, relevant, n)) / static_cast<double>(n);
}

double recall_at_n(const RankedList& ranked, const std::unordered_set<ItemId>& relevant,
                   std::size_t n) {
    if (n < 1) throw UsageError("recall cutoff must be >= 1");
    if (relevant.empty()) throw UsageError("recall needs a nonempty relevant set");
    return static_cast<double>(hit_count(ranked, relevant, n)) /
           static_cast<double>(relevant.size());
}

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    if (denom == 0.0) return 0.0;
    return 2.0 * precision * recall / denom;
}

double auc_from_scores(const std::vector<double>& positives, const std::vector<double>& negatives) {
    if (positives.empty() || negatives.empty()) {
        throw UsageError("auc needs at least one positive and one negative score");
    }
    // Rank-sum formulation with midranks for ties.
    struct Scored {
        double score;
        bool positive;
    };
    std::vector<Scored> all;
    all.reserve(positives.size() + negatives.size());
    for (double s : positives) all.push_back({s, true});
    for (double s : negatives) all.push_back({s, false});
    std::sort(all.begin(), all.end(),
              [](const Scored& a, const Scored& b) { return a.score < b.score; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].positive) rank_sum_pos += midrank;
        }
        i = j;
    }
    const double n_pos = static_cast<double>(positives.size());
    const double n_neg = static_cast<double>(negatives.size());
    const double u_stat = rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0;
    return u_stat / (n_pos * n_neg);
}

double diversity_at_n(const RankedList& ranked,
                      const std::unordered_map<ItemId, std::int32_t>& categories, std::size_t n) {
    if (n < 2) throw UsageError("diversity cutoff must be >= 2");
    const std::size_t top = std::min(n, ranked.items.size());
    std::size_t distinct_pairs = 0;
    for (std::size_t j = 0; j < top; ++j) {
        auto cj = categories.find(ranked.items[j]);
        if (cj == categories.end()) {
            throw DataError("item " + std::to_string(ranked.items[j]) + " has no category label");
        }
        for (std::size_t k = j + 1; k < top; ++k) {
            auto ck = categories.find(ranked.items[k]);
            if (ck == categories.end()) {
                throw DataError("item " + std::to_string(ranked.items[k]) + " has no category label");
            }
            if (cj->second != ck->second) ++distinct_pairs;
        }
    }
    return static_cast<double>(distinct_pairs) /
           (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

std::vector<std::pair<UserId, std::vector<ItemId>>> build_candidate_pools(
    const ChronoSplit& split, const std::vector<ItemId>& universe, const EvalOptions& opts) {
    std::unordered_set<ItemId> known(universe.begin(), universe.end());
    std::vector<std::pair<UserId, std::vector<ItemId>>> pools;
    for (const auto& test_user : split.test.users()) {
        const UserHistory* train_user = split.train.find(test_user.user);
        if (train_user == nullptr) continue;

        std::unordered_set<ItemId> interacted;
        for (const auto& x : train_user->interactions) interacted.insert(x.item);
        for (const auto& x : test_user.interactions) interacted.insert(x.item);

        std::vector<ItemId> pool;
        std::unordered_set<ItemId> in_pool;
        for (const auto& x : test_user.interactions) {
            if (known.count(x.item) > 0 && in_pool.insert(x.item).second) pool.push_back(x.item);
        }
        std::sort(pool.begin(), pool.end());

        std::vector<ItemId> unobserved;
        unobserved.reserve(universe.size());
        for (ItemId item : universe) {
            if (interacted.count(item) == 0) unobserved.push_back(item);
        }
        Rng rng = substream(opts.seed, "sampling.eval", static_cast<std::uint64_t>(test_user.user));
        const std::size_t want = std::min(opts.candidate_pool, unobserved.size());
        for (std::size_t i = 0; i < want; ++i) {  // partial Fisher-Yates
            const std::size_t j = i + static_cast<std::size_t>(
                                          rng.next_below(unobserved.size() - i));
            std::swap(unobserved[i], unobserved[j]);
            pool.push_back(unobserved[i]);
        }
        pools.emplace_back(test_user.user, std::move(pool));
    }
    return pools;
}

EvalReport report_from_rankings(const std::vector<UserEval>& per_user,
                                const std::unordered_map<ItemId, std::int32_t>& categories,
                                std::size_t n) {
    EvalReport report;
    report.n = n;
    double sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0, sum_auc = 0.0, sum_div = 0.0;
    bool diversity_ok = true;
    std::size_t users = 0;

    for (const auto& ue : per_user) {
        if (ue.relevant.empty() || ue.ranked.items.empty()) continue;

        std::vector<double> pos_scores, neg_scores;
        for (std::size_t i = 0; i < ue.ranked.items.size(); ++i) {
            (ue.relevant.count(ue.ranked.items[i]) > 0 ? pos_scores : neg_scores)
                .push_back(ue.ranked.scores[i]);
        }
        if (pos_scores.empty() || neg_scores.empty()) continue;

        const double p = precision_at_n(ue.ranked, ue.relevant, n);
        const double r = recall_at_n(ue.ranked, ue.relevant, n);
        sum_p += p;
        sum_r += r;
        sum_f1 += f1_score(p, r);
        sum_auc += auc_from_scores(pos_scores, neg_scores);
        if (diversity_ok) {
            try {
                sum_div += diversity_at_n(ue.ranked, categories, n);
            } catch (const DataError&) {
                diversity_ok = false;  // unlabeled items: report diversity as NaN
            }
        }
        ++users;
    }

    report.users_evaluated = users;
    if (users > 0) {
        const double inv = 1.0 / static_cast<double>(users);
        report.precision = sum_p * inv;
        report.recall = sum_r * inv;
        report.f1 = sum_f1 * inv;
        report.auc = sum_auc * inv;
        report.diversity =
            diversity_ok ? sum_div * inv : std::numeric_limits<double>::quiet_NaN();
    } else {
        report.diversity = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

EvalDetail evaluate(const ModelParams& params, const ChronoSplit& split,
                    const NeighborIndex& index, const EvalOptions& opts,
                    std::size_t future_cap) {
    EvalDetail detail;
    const auto pools = build_candidate_pools(split, params.vocab, opts);

    for (const auto& [user, pool] : pools) {
        const UserHistory* train_user = split.train.find(user);
        const UserHistory* test_user = split.test.find(user);
        if (train_user == nullptr || test_user == nullptr || !index.contains(user)) continue;

        FutureSequence future = extract_future_sequence(user, index, split.train, future_cap);
        UserSequences seqs = build_user_sequences(*train_user, future, params);
        if (!seqs.has_positive()) continue;

        const TrendGroup pos_hist = route_trends(seqs.pos_history, params);
        const TrendGroup pos_fut = route_trends(seqs.pos_future, params);
        TrendGroup neg_hist, neg_fut;
        const bool has_neg = seqs.has_negative();
        if (has_neg) {
            neg_hist = route_trends(seqs.neg_history, params);
            neg_fut = route_trends(seqs.neg_future, params);
        }
        // Recommendation moment: the end of the user's train history.
        const double query_time =
            static_cast<double>(train_user->interactions.back().timestamp);
        const UserRepresentation pos =
            build_user_representation(pos_hist, pos_fut, query_time, params);
        UserRepresentation neg;
        if (has_neg) neg = build_user_representation(neg_hist, neg_fut, query_time, params);

        UserEval ue;
        ue.user = user;
        std::vector<std::pair<double, ItemId>> scored;
        scored.reserve(pool.size());
        for (ItemId item : pool) {
            auto idx = params.index_of(item);
            if (!idx) continue;  // outside the training vocabulary
            const double z = score_item(pos, params.item_embeddings.row(*idx),
                                        has_neg ? &neg : nullptr, params);
            scored.emplace_back(z, item);
        }
        if (scored.empty()) continue;
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (const auto& [score, item] : scored) {
            ue.ranked.items.push_back(item);
            ue.ranked.scores.push_back(score);
        }
        ue.ranked.user = user;
        for (std::size_t i : test_user->positives) {
            const ItemId item = test_user->interactions[i].item;
            if (params.index_of(item)) ue.relevant.insert(item);
        }
        detail.per_user.push_back(std::move(ue));
    }

    std::unordered_map<ItemId, std::int32_t> categories = split.train.category_map();
    for (const auto& [item, cat] : split.test.category_map()) categories.emplace(item, cat);
    detail.report = report_from_rankings(detail.per_user, categories, opts.n);
    return detail;
}

}  // namespace dmr
