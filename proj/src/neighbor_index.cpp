#include "dmr/neighbor_index.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace dmr {

void NeighborParams::validate() const {
    if (k < 1) throw UsageError("neighbor search needs k >= 1");
    if (!(tau >= 0.0 && tau < 1.0)) throw UsageError("tau must be in [0, 1)");
    if (g < n_max) throw UsageError("candidate cap g must be >= n_max");
}

const std::vector<NeighborEntry>& NeighborIndex::neighbors_of(UserId user) const {
    auto it = lists.find(user);
    if (it == lists.end()) throw DataError("user " + std::to_string(user) + " not in neighbor index");
    return it->second;
}

std::vector<ItemId> query_items(const UserHistory& h, std::size_t k) {
    std::vector<ItemId> items;
    const std::size_t n = h.interactions.size();
    const std::size_t take = std::min(k, n);
    for (std::size_t i = 0; i < take; ++i) {
        items.push_back(h.interactions[n - 1 - i].item);
    }
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return items;
}

Timestamp query_timestamp(const UserHistory& h, std::size_t k) {
    const std::size_t n = h.interactions.size();
    if (n == 0) throw DataError("query timestamp of an empty history");
    const std::size_t idx = n > k ? n - k : 0;
    return h.interactions[idx].timestamp;
}

std::size_t single_common_quota(std::size_t n_max) {
    return n_max / 5;  // floor(0.2 * n_max)
}

NeighborIndex build_neighbor_index(const InteractionLog& log, const NeighborParams& params) {
    params.validate();
    if (log.user_count() == 0) throw DataError("cannot build a neighbor index from an empty log");

    // item -> users who interacted with it
    std::unordered_map<ItemId, std::vector<std::size_t>> item_users;
    const auto& users = log.users();
    for (std::size_t i = 0; i < users.size(); ++i) {
        std::unordered_set<ItemId> seen;
        for (const auto& x : users[i].interactions) {
            if (seen.insert(x.item).second) item_users[x.item].push_back(i);
        }
    }

    NeighborIndex index;
    index.params = params;

    for (const auto& u : users) {
        auto& list = index.lists[u.user];  // presence even when empty

        std::unordered_set<std::size_t> candidate_set;
        for (ItemId q : query_items(u, params.k)) {
            auto it = item_users.find(q);
            if (it == item_users.end()) continue;
            for (std::size_t other : it->second) {
                if (users[other].user != u.user) candidate_set.insert(other);
            }
        }

        std::vector<NeighborEntry> ranked;
        ranked.reserve(candidate_set.size());
        for (std::size_t other : candidate_set) {
            SimilarityScore s = user_similarity(u, users[other], params.similarity);
            if (!s.defined || !(s.mapped > params.tau)) continue;
            ranked.push_back({users[other].user, s});
        }
        std::sort(ranked.begin(), ranked.end(), [](const NeighborEntry& a, const NeighborEntry& b) {
            if (a.score.mapped != b.score.mapped) return a.score.mapped > b.score.mapped;
            return a.neighbor < b.neighbor;
        });
        if (ranked.size() > params.g) ranked.resize(params.g);

        const std::size_t quota = single_common_quota(params.n_max);
        std::size_t singles = 0;
        for (const auto& entry : ranked) {
            if (list.size() >= params.n_max) break;
            if (entry.score.common_items == 1) {
                if (singles >= quota) continue;
                ++singles;
            }
            list.push_back(entry);
        }
    }
    return index;
}

void save_neighbor_index(const NeighborIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    char buf[64];
    out << "DMRNET 1\n";
    std::snprintf(buf, sizeof(buf), "%.17g", index.params.tau);
    out << index.params.k << ' ' << index.params.g << ' ' << buf << ' ' << index.params.n_max
        << ' ' << index.lists.size() << ' ' << similarity_kind_name(index.params.similarity)
        << '\n';
    for (const auto& [user, list] : index.lists) {
        out << "u " << user << ' ' << list.size() << '\n';
        for (const auto& entry : list) {
            std::snprintf(buf, sizeof(buf), "%.17g", entry.score.mapped);
            out << user << ' ' << entry.neighbor << ' ' << buf << ' ' << entry.score.common_items
                << '\n';
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

NeighborIndex load_neighbor_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);

    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "DMRNET") {
        throw DataError("not a neighbor index file: " + path);
    }
    if (version != 1) {
        throw DataError("unsupported neighbor index version " + std::to_string(version));
    }

    NeighborIndex index;
    std::size_t user_count = 0;
    std::string kind;
    if (!(in >> index.params.k >> index.params.g >> index.params.tau >> index.params.n_max >>
          user_count >> kind)) {
        throw DataError("truncated neighbor index header: " + path);
    }
    index.params.similarity = similarity_kind_from_name(kind);

    for (std::size_t i = 0; i < user_count; ++i) {
        std::string tag;
        UserId user = 0;
        std::size_t n = 0;
        if (!(in >> tag >> user >> n) || tag != "u") {
            throw DataError("malformed neighbor index user row in " + path);
        }
        auto& list = index.lists[user];
        list.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            UserId row_user = 0;
            NeighborEntry& entry = list[j];
            if (!(in >> row_user >> entry.neighbor >> entry.score.mapped >>
                  entry.score.common_items) ||
                row_user != user) {
                throw DataError("malformed neighbor row in " + path);
            }
            entry.score.raw = 2.0 * entry.score.mapped - 1.0;
            entry.score.defined = true;
        }
    }
    return index;
}

}  // namespace dmr
