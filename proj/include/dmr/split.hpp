#pragma once

#include <unordered_map>

#include "dmr/types.hpp"

namespace dmr {

/// Per-user chronological train/test partition. Users whose split would leave
/// either side empty are dropped (and counted) rather than rejected.
struct ChronoSplit {
    InteractionLog train;
    InteractionLog test;
    double split_fraction = 0.0;
    std::size_t dropped_users = 0;

    /// Last train timestamp per kept user; the leakage guard in training
    /// checks every consumed interaction against its owner's boundary.
    std::unordered_map<UserId, Timestamp> train_boundary;
};

/// First ceil(fraction * n) interactions per user go to train, the rest to
/// test. Throws UsageError when fraction is outside (0, 1).
ChronoSplit chrono_split(const InteractionLog& log, double fraction);

/// Reassembles a split from separately stored train/test logs, verifying the
/// chronological invariant per user.
ChronoSplit split_from_logs(InteractionLog train, InteractionLog test);

/// Number of train interactions for a user with `n` total.
std::size_t train_count(std::size_t n, double fraction);

}  // namespace dmr
