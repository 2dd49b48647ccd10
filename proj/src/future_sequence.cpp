#include "dmr/future_sequence.hpp"

#include <algorithm>

namespace dmr {

FutureSequence extract_future_sequence(UserId user, const NeighborIndex& index,
                                       const InteractionLog& log, std::size_t cap) {
    const auto& neighbors = index.neighbors_of(user);  // throws if absent
    FutureSequence fs;
    fs.user = user;
    fs.cap = cap;

    const UserHistory& own = log.at(user);
    if (own.interactions.empty()) return fs;
    const Timestamp query_ts = query_timestamp(own, index.params.k);

    struct Tagged {
        FutureEntry entry;
        std::size_t rank;
    };
    std::vector<Tagged> collected;
    for (std::size_t rank = 0; rank < neighbors.size(); ++rank) {
        const UserHistory* nh = log.find(neighbors[rank].neighbor);
        if (nh == nullptr) continue;
        std::size_t taken = 0;
        for (const auto& x : nh->interactions) {
            if (x.timestamp < query_ts) continue;
            if (taken >= cap) break;
            collected.push_back({{x.item, x.timestamp, x.click, nh->user}, rank});
            ++taken;
        }
    }
    std::sort(collected.begin(), collected.end(), [](const Tagged& a, const Tagged& b) {
        if (a.entry.timestamp != b.entry.timestamp) return a.entry.timestamp < b.entry.timestamp;
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.entry.item < b.entry.item;
    });

    fs.entries.reserve(collected.size());
    for (const auto& t : collected) fs.entries.push_back(t.entry);
    return fs;
}

}  // namespace dmr
