#pragma once

#include <map>
#include <string>
#include <vector>

#include "dmr/similarity.hpp"
#include "dmr/types.hpp"

namespace dmr {

struct NeighborParams {
    std::size_t k = 1;        // query items per user (the last k interactions)
    std::size_t g = 200;      // candidate cap, applied after ranking
    double tau = 0.5;         // mapped-similarity threshold, entries must exceed it
    std::size_t n_max = 20;   // final neighbor count
    SimilarityKind similarity = SimilarityKind::pcc;

    void validate() const;
};

struct NeighborEntry {
    UserId neighbor = 0;
    SimilarityScore score;
};

/// Per-user ranked neighbor lists. Lists are sorted by (mapped similarity
/// descending, neighbor id ascending); at most floor(0.2 * n_max) entries per
/// list have exactly one common item.
struct NeighborIndex {
    NeighborParams params;
    std::map<UserId, std::vector<NeighborEntry>> lists;

    bool contains(UserId user) const { return lists.count(user) > 0; }
    const std::vector<NeighborEntry>& neighbors_of(UserId user) const;
};

/// Builds the index: query items are the last k interactions per user,
/// candidates are other users sharing any query item, scored by the selected
/// similarity, thresholded at tau, ranked, capped at g, then greedily
/// truncated to n_max under the single-common-item quota.
NeighborIndex build_neighbor_index(const InteractionLog& log, const NeighborParams& params);

void save_neighbor_index(const NeighborIndex& index, const std::string& path);
NeighborIndex load_neighbor_index(const std::string& path);

/// Query items for one user: distinct item ids among the last k interactions.
std::vector<ItemId> query_items(const UserHistory& h, std::size_t k);

/// Timestamp of the user's k-th-from-last interaction (the query item).
Timestamp query_timestamp(const UserHistory& h, std::size_t k);

std::size_t single_common_quota(std::size_t n_max);

}  // namespace dmr
