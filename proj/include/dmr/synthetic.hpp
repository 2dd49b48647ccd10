#pragma once

#include <string>
#include <vector>

#include "dmr/metrics.hpp"
#include "dmr/split.hpp"
#include "dmr/types.hpp"

namespace dmr {

/// Generator configuration for interaction logs with planted multi-trend
/// structure. Each user is assigned `trends_per_user` archetypes drawn by
/// `archetype_weights`; clicked items follow the active archetype's category
/// affinity while non-clicks are uniform over all items.
struct PlantedWorld {
    std::size_t n_users = 500;
    std::size_t n_items = 2000;
    std::size_t n_categories = 8;
    std::size_t trends_per_user = 2;
    std::size_t interactions_per_user = 50;
    std::vector<std::vector<double>> affinity;  // archetype x category, rows sum to 1
    std::vector<double> archetype_weights;      // sums to 1
    double drift_prob = 0.1;   // chance the active trend switches between events
    double click_noise = 0.05; // chance a click ignores the affinity (uniform item)
    double click_rate = 0.65;  // chance an event is a click
    std::uint64_t seed = 1;

    /// Smoothed one-hot affinity (one archetype per category, `concentration`
    /// mass on its own category) and Zipf archetype popularity.
    static PlantedWorld defaults(std::size_t users, std::size_t items, std::size_t categories,
                                 std::size_t trends_per_user, std::uint64_t seed,
                                 double concentration = 0.9);

    void validate() const;
};

/// Planted labels: each user's archetypes plus the archetype that was active
/// at every event, aligned with the canonical log order.
struct GroundTruth {
    std::vector<std::pair<UserId, std::vector<int>>> user_archetypes;  // sorted by user
    std::vector<std::tuple<UserId, Timestamp, int>> event_archetypes;  // sorted (user, ts)
};

struct SyntheticData {
    InteractionLog log;
    GroundTruth truth;
};

/// Deterministic in world.seed; timestamps strictly increase per user.
SyntheticData generate(const PlantedWorld& world);

void write_ground_truth(const GroundTruth& truth, const std::string& path);

/// Ranks each user's candidate pool by train-set click count (ties by item
/// id ascending). Pools match the ones `evaluate` uses for the same options.
std::vector<UserEval> popularity_baseline(const ChronoSplit& split, const EvalOptions& opts);

}  // namespace dmr
