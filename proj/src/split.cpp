#include "dmr/split.hpp"

#include <cmath>

namespace dmr {

std::size_t train_count(std::size_t n, double fraction) {
    // Small backoff so fraction * n values that are integers up to rounding
    // (0.8 * 10 and friends) do not get pushed to the next ceiling.
    double raw = fraction * static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

ChronoSplit chrono_split(const InteractionLog& log, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw UsageError("split fraction must be in (0, 1)");
    }
    ChronoSplit split;
    split.split_fraction = fraction;
    for (const auto& u : log.users()) {
        const std::size_t n = u.interactions.size();
        const std::size_t n_train = n == 0 ? 0 : train_count(n, fraction);
        if (n_train == 0 || n_train >= n) {
            ++split.dropped_users;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            (i < n_train ? split.train : split.test).add(u.user, u.interactions[i]);
        }
        split.train_boundary[u.user] = u.interactions[n_train - 1].timestamp;
    }
    split.train.finalize();
    split.test.finalize();
    return split;
}

ChronoSplit split_from_logs(InteractionLog train, InteractionLog test) {
    ChronoSplit split;
    split.train = std::move(train);
    split.test = std::move(test);
    for (const auto& u : split.train.users()) {
        if (u.interactions.empty()) continue;
        const Timestamp boundary = u.interactions.back().timestamp;
        if (const UserHistory* t = split.test.find(u.user); t != nullptr) {
            if (!t->interactions.empty() && t->interactions.front().timestamp < boundary) {
                throw DataError("test interactions of user " + std::to_string(u.user) +
                                " precede the train split");
            }
        }
        split.train_boundary[u.user] = boundary;
    }
    return split;
}

}  // namespace dmr
