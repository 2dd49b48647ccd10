#pragma once

#include <vector>

#include "dmr/neighbor_index.hpp"
#include "dmr/types.hpp"

namespace dmr {

struct FutureEntry {
    ItemId item = 0;
    Timestamp timestamp = 0;
    bool click = false;
    UserId source = 0;  // contributing neighbor
};

/// A user's relative future: neighbor interactions timestamped at or after
/// the user's query item, at most `cap` per neighbor, ordered by
/// (timestamp, neighbor rank, item).
struct FutureSequence {
    UserId user = 0;
    std::vector<FutureEntry> entries;
    std::size_t cap = 0;
};

FutureSequence extract_future_sequence(UserId user, const NeighborIndex& index,
                                       const InteractionLog& log, std::size_t cap = 100);

}  // namespace dmr
