#include "dmr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "dmr/rng.hpp"

namespace dmr {

PlantedWorld PlantedWorld::defaults(std::size_t users, std::size_t items, std::size_t categories,
                                    std::size_t trends_per_user, std::uint64_t seed,
                                    double concentration) {
    PlantedWorld w;
    w.n_users = users;
    w.n_items = items;
    w.n_categories = categories;
    w.trends_per_user = trends_per_user;
    w.seed = seed;

    w.affinity.assign(categories, std::vector<double>(categories, 0.0));
    for (std::size_t a = 0; a < categories; ++a) {
        const double off = categories > 1
                               ? (1.0 - concentration) / static_cast<double>(categories - 1)
                               : 0.0;
        for (std::size_t c = 0; c < categories; ++c) {
            w.affinity[a][c] = (a == c) ? (categories > 1 ? concentration : 1.0) : off;
        }
    }

    // Zipf popularity over archetypes: real catalogues are category-skewed.
    w.archetype_weights.resize(categories);
    double total = 0.0;
    for (std::size_t a = 0; a < categories; ++a) {
        w.archetype_weights[a] = 1.0 / static_cast<double>(a + 1);
        total += w.archetype_weights[a];
    }
    for (double& v : w.archetype_weights) v /= total;
    return w;
}

void PlantedWorld::validate() const {
    if (n_users < 1 || n_items < 1 || n_categories < 1) {
        throw UsageError("planted world counts must be >= 1");
    }
    if (trends_per_user < 1 || interactions_per_user < 1) {
        throw UsageError("planted world trends/interactions per user must be >= 1");
    }
    auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!is_prob(drift_prob) || !is_prob(click_noise) || !is_prob(click_rate)) {
        throw UsageError("planted world probabilities must be in [0, 1]");
    }
    if (affinity.empty()) throw UsageError("planted world needs an affinity matrix");
    if (trends_per_user > affinity.size()) {
        throw UsageError("trends_per_user exceeds the number of archetypes");
    }
    for (const auto& row : affinity) {
        if (row.size() != n_categories) {
            throw UsageError("affinity rows must have n_categories entries");
        }
        double sum = 0.0;
        for (double v : row) {
            if (v < 0.0) throw UsageError("affinity entries must be nonnegative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw UsageError("affinity rows must sum to 1");
    }
    if (archetype_weights.size() != affinity.size()) {
        throw UsageError("archetype_weights must match the affinity row count");
    }
}

namespace {

std::int32_t category_of_item(ItemId item, std::size_t n_categories) {
    return static_cast<std::int32_t>(item % static_cast<ItemId>(n_categories));
}

ItemId sample_item_in_category(std::size_t category, const PlantedWorld& w, Rng& rng) {
    // Items are striped over categories: item % n_categories == category.
    const std::size_t stripe =
        (w.n_items - category + w.n_categories - 1) / w.n_categories;  // count in this stripe
    const std::size_t pick = static_cast<std::size_t>(rng.next_below(stripe));
    return static_cast<ItemId>(pick * w.n_categories + category);
}

}  // namespace

SyntheticData generate(const PlantedWorld& world) {
    world.validate();
    SyntheticData data;

    for (std::size_t ui = 0; ui < world.n_users; ++ui) {
        const UserId user = static_cast<UserId>(ui + 1);
        Rng rng = substream(world.seed, "generator", static_cast<std::uint64_t>(user));

        // Distinct archetypes for this user, drawn by popularity.
        std::vector<int> archetypes;
        std::vector<double> weights = world.archetype_weights;
        for (std::size_t t = 0; t < world.trends_per_user; ++t) {
            const std::size_t pick = rng.next_categorical(weights);
            archetypes.push_back(static_cast<int>(pick));
            weights[pick] = 0.0;
        }
        data.truth.user_archetypes.emplace_back(user, archetypes);

        std::size_t active = static_cast<std::size_t>(rng.next_below(archetypes.size()));
        Timestamp ts = static_cast<Timestamp>(1 + rng.next_below(50));
        for (std::size_t e = 0; e < world.interactions_per_user; ++e) {
            if (e > 0) {
                ts += static_cast<Timestamp>(1 + rng.next_below(100));
                if (archetypes.size() > 1 && rng.next_bernoulli(world.drift_prob)) {
                    // switch to a different trend, uniform over the others
                    const std::size_t shift =
                        1 + static_cast<std::size_t>(rng.next_below(archetypes.size() - 1));
                    active = (active + shift) % archetypes.size();
                }
            }

            Interaction x;
            x.timestamp = ts;
            x.click = rng.next_bernoulli(world.click_rate);
            const int archetype = archetypes[active];
            if (x.click && !rng.next_bernoulli(world.click_noise)) {
                const std::size_t category =
                    rng.next_categorical(world.affinity[static_cast<std::size_t>(archetype)]);
                x.item = sample_item_in_category(category, world, rng);
            } else {
                x.item = static_cast<ItemId>(rng.next_below(world.n_items));
            }
            x.category = category_of_item(x.item, world.n_categories);
            data.log.add(user, x);
            data.truth.event_archetypes.emplace_back(user, ts, archetype);
        }
    }
    data.log.finalize();
    std::sort(data.truth.event_archetypes.begin(), data.truth.event_archetypes.end());
    return data;
}

void write_ground_truth(const GroundTruth& truth, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << "# user archetypes...\n";
    for (const auto& [user, archetypes] : truth.user_archetypes) {
        out << "u " << user;
        for (int a : archetypes) out << ' ' << a;
        out << '\n';
    }
    out << "# user timestamp active_archetype\n";
    for (const auto& [user, ts, archetype] : truth.event_archetypes) {
        out << user << ' ' << ts << ' ' << archetype << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<UserEval> popularity_baseline(const ChronoSplit& split, const EvalOptions& opts) {
    std::unordered_map<ItemId, std::size_t> click_counts;
    for (const auto& u : split.train.users()) {
        for (const auto& x : u.interactions) {
            if (x.click) ++click_counts[x.item];
        }
    }

    // Same universe the model scores over (its vocabulary is the train items),
    // so baseline and model rank identical candidate pools.
    const std::vector<ItemId> universe = split.train.item_universe();
    std::unordered_set<ItemId> known(universe.begin(), universe.end());

    std::vector<UserEval> result;
    for (auto& [user, pool] : build_candidate_pools(split, universe, opts)) {
        const UserHistory* test_user = split.test.find(user);
        if (test_user == nullptr) continue;

        std::vector<std::pair<double, ItemId>> scored;
        scored.reserve(pool.size());
        for (ItemId item : pool) {
            auto it = click_counts.find(item);
            scored.emplace_back(it == click_counts.end() ? 0.0 : static_cast<double>(it->second),
                                item);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        UserEval ue;
        ue.user = user;
        ue.ranked.user = user;
        for (const auto& [score, item] : scored) {
            ue.ranked.items.push_back(item);
            ue.ranked.scores.push_back(score);
        }
        for (std::size_t i : test_user->positives) {
            const ItemId item = test_user->interactions[i].item;
            if (known.count(item) > 0) ue.relevant.insert(item);
        }
        result.push_back(std::move(ue));
    }
    return result;
}

}  // namespace dmr
