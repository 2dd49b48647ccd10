#pragma once

#include <span>
#include <string>
#include <vector>

#include "dmr/types.hpp"

namespace dmr {

enum class SimilarityKind { pcc, overlap };

SimilarityKind similarity_kind_from_name(const std::string& name);
std::string similarity_kind_name(SimilarityKind kind);

/// User-user similarity. `raw` lives in [-1, 1] and `mapped` = (raw + 1) / 2.
/// Undefined (defined == false) when there are no common items or either
/// user's levels over the common set have zero variance.
struct SimilarityScore {
    double raw = 0.0;
    double mapped = 0.0;
    std::size_t common_items = 0;
    bool defined = false;
};

/// Pearson correlation of two aligned level vectors, means taken over the
/// vectors themselves. Exposed separately so tests can drive it with
/// real-valued levels.
SimilarityScore pcc_from_levels(std::span<const double> a, std::span<const double> b);

/// PCC over the common-item set with binary click levels (an item's level is
/// 1 when the user ever clicked it).
SimilarityScore pcc_similarity(const UserHistory& a, const UserHistory& b);

/// |I(a) n I(b)| / sqrt(|I(a)| * |I(b)|), reported on the mapped scale.
SimilarityScore overlap_similarity(const UserHistory& a, const UserHistory& b);

SimilarityScore user_similarity(const UserHistory& a, const UserHistory& b, SimilarityKind kind);

/// Sorted unique (item, level) pairs for one user: level 1 if ever clicked.
std::vector<std::pair<ItemId, double>> click_levels(const UserHistory& h);

}  // namespace dmr
