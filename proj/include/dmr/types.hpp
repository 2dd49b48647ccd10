#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dmr {

using UserId = std::int64_t;
using ItemId = std::int64_t;
using Timestamp = std::int64_t;

/// Bad input data (malformed files, constraint violations). CLI exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration. CLI exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite value detected in a numeric pipeline. CLI exit code 4.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One (user, item) event. `category` is an optional label used only by the
/// diversity metric; -1 means unlabeled.
struct Interaction {
    ItemId item = 0;
    Timestamp timestamp = 0;
    bool click = false;
    std::int32_t category = -1;

    bool has_category() const { return category >= 0; }

    bool operator==(const Interaction&) const = default;
};

/// A user's interactions sorted by (timestamp, item), partitioned into
/// clicked and non-clicked index lists.
struct UserHistory {
    UserId user = 0;
    std::vector<Interaction> interactions;
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;

    /// Sorts interactions by (timestamp, item id) and rebuilds the
    /// positive/negative index partition.
    void normalize();

    bool operator==(const UserHistory&) const = default;
};

/// Validated collection of user histories, ordered by user id. Immutable once
/// finalized; safe to share across threads.
class InteractionLog {
public:
    /// Stages one interaction; call finalize() before reading.
    void add(UserId user, const Interaction& x);

    /// Sorts everything and enforces the log invariants: non-negative
    /// timestamps and unique (user, item, timestamp) triples.
    void finalize();

    const std::vector<UserHistory>& users() const { return users_; }
    const UserHistory* find(UserId user) const;
    const UserHistory& at(UserId user) const;

    std::size_t user_count() const { return users_.size(); }
    std::size_t interaction_count() const;

    /// Sorted unique item ids over the whole log.
    std::vector<ItemId> item_universe() const;

    /// First category label seen per item (items without labels omitted).
    std::unordered_map<ItemId, std::int32_t> category_map() const;

    /// [min, max] timestamp over the log; {0, 0} when empty.
    std::pair<Timestamp, Timestamp> time_range() const;

    bool operator==(const InteractionLog&) const;

private:
    std::vector<UserHistory> users_;               // sorted by user id after finalize
    std::unordered_map<UserId, std::size_t> index_;
    bool finalized_ = false;
};

}  // namespace dmr
