#include "dmr/types.hpp"

#include <algorithm>

namespace dmr {

void UserHistory::normalize() {
    std::sort(interactions.begin(), interactions.end(),
              [](const Interaction& a, const Interaction& b) {
                  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                  return a.item < b.item;
              });
    positives.clear();
    negatives.clear();
    for (std::size_t i = 0; i < interactions.size(); ++i) {
        (interactions[i].click ? positives : negatives).push_back(i);
    }
}

void InteractionLog::add(UserId user, const Interaction& x) {
    auto it = index_.find(user);
    if (it == index_.end()) {
        index_.emplace(user, users_.size());
        users_.push_back(UserHistory{user, {}, {}, {}});
        it = index_.find(user);
    }
    users_[it->second].interactions.push_back(x);
    finalized_ = false;
}

void InteractionLog::finalize() {
    std::sort(users_.begin(), users_.end(),
              [](const UserHistory& a, const UserHistory& b) { return a.user < b.user; });
    index_.clear();
    for (std::size_t i = 0; i < users_.size(); ++i) {
        index_.emplace(users_[i].user, i);
        users_[i].normalize();
        const auto& xs = users_[i].interactions;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (xs[j].timestamp < 0) {
                throw DataError("negative timestamp for user " + std::to_string(users_[i].user));
            }
            if (j > 0 && xs[j].timestamp == xs[j - 1].timestamp && xs[j].item == xs[j - 1].item) {
                throw DataError("duplicate (user,item,timestamp) triple: user " +
                                std::to_string(users_[i].user) + ", item " +
                                std::to_string(xs[j].item) + ", timestamp " +
                                std::to_string(xs[j].timestamp));
            }
        }
    }
    finalized_ = true;
}

const UserHistory* InteractionLog::find(UserId user) const {
    auto it = index_.find(user);
    return it == index_.end() ? nullptr : &users_[it->second];
}

const UserHistory& InteractionLog::at(UserId user) const {
    const UserHistory* h = find(user);
    if (h == nullptr) throw DataError("unknown user " + std::to_string(user));
    return *h;
}

std::size_t InteractionLog::interaction_count() const {
    std::size_t n = 0;
    for (const auto& u : users_) n += u.interactions.size();
    return n;
}

std::vector<ItemId> InteractionLog::item_universe() const {
    std::vector<ItemId> items;
    for (const auto& u : users_) {
        for (const auto& x : u.interactions) items.push_back(x.item);
    }
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return items;
}

std::unordered_map<ItemId, std::int32_t> InteractionLog::category_map() const {
    std::unordered_map<ItemId, std::int32_t> categories;
    for (const auto& u : users_) {
        for (const auto& x : u.interactions) {
            if (x.has_category()) categories.emplace(x.item, x.category);
        }
    }
    return categories;
}

std::pair<Timestamp, Timestamp> InteractionLog::time_range() const {
    bool any = false;
    Timestamp lo = 0, hi = 0;
    for (const auto& u : users_) {
        for (const auto& x : u.interactions) {
            if (!any) {
                lo = hi = x.timestamp;
                any = true;
            } else {
                lo = std::min(lo, x.timestamp);
                hi = std::max(hi, x.timestamp);
            }
        }
    }
    return {lo, hi};
}

bool InteractionLog::operator==(const InteractionLog& other) const {
    return users_ == other.users_;
}

}  // namespace dmr
