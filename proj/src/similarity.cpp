#include "dmr/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace dmr {

SimilarityKind similarity_kind_from_name(const std::string& name) {
    if (name == "pcc") return SimilarityKind::pcc;
    if (name == "overlap") return SimilarityKind::overlap;
    throw UsageError("unknown similarity '" + name + "' (expected pcc or overlap)");
}

std::string similarity_kind_name(SimilarityKind kind) {
    return kind == SimilarityKind::pcc ? "pcc" : "overlap";
}

std::vector<std::pair<ItemId, double>> click_levels(const UserHistory& h) {
    std::vector<std::pair<ItemId, double>> levels;
    levels.reserve(h.interactions.size());
    for (const auto& x : h.interactions) {
        levels.emplace_back(x.item, x.click ? 1.0 : 0.0);
    }
    std::sort(levels.begin(), levels.end());
    // Repeated (user, item) pairs collapse to one level: clicked if ever clicked.
    std::size_t out = 0;
    for (std::size_t i = 0; i < levels.size();) {
        ItemId item = levels[i].first;
        double level = 0.0;
        while (i < levels.size() && levels[i].first == item) {
            level = std::max(level, levels[i].second);
            ++i;
        }
        levels[out++] = {item, level};
    }
    levels.resize(out);
    return levels;
}

SimilarityScore pcc_from_levels(std::span<const double> a, std::span<const double> b) {
    SimilarityScore score;
    score.common_items = a.size();
    if (a.empty() || a.size() != b.size()) return score;

    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(a.size());
    mean_b /= static_cast<double>(b.size());

    double num = 0.0, sq_a = 0.0, sq_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        num += da * db;
        sq_a += da * da;
        sq_b += db * db;
    }
    if (sq_a <= 0.0 || sq_b <= 0.0) return score;

    score.raw = num / (std::sqrt(sq_a) * std::sqrt(sq_b));
    score.raw = std::clamp(score.raw, -1.0, 1.0);
    score.mapped = (score.raw + 1.0) / 2.0;
    score.defined = true;
    return score;
}

SimilarityScore pcc_similarity(const UserHistory& a, const UserHistory& b) {
    const auto levels_a = click_levels(a);
    const auto levels_b = click_levels(b);

    std::vector<double> ra, rb;
    std::size_t i = 0, j = 0;
    while (i < levels_a.size() && j < levels_b.size()) {
        if (levels_a[i].first < levels_b[j].first) {
            ++i;
        } else if (levels_b[j].first < levels_a[i].first) {
            ++j;
        } else {
            ra.push_back(levels_a[i].second);
            rb.push_back(levels_b[j].second);
            ++i;
            ++j;
        }
    }
    return pcc_from_levels(ra, rb);
}

SimilarityScore overlap_similarity(const UserHistory& a, const UserHistory& b) {
    const auto levels_a = click_levels(a);
    const auto levels_b = click_levels(b);

    std::size_t common = 0;
    std::size_t i = 0, j = 0;
    while (i < levels_a.size() && j < levels_b.size()) {
        if (levels_a[i].first < levels_b[j].first) {
            ++i;
        } else if (levels_b[j].first < levels_a[i].first) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }

    SimilarityScore score;
    score.common_items = common;
    if (common == 0 || levels_a.empty() || levels_b.empty()) return score;
    score.mapped = static_cast<double>(common) /
                   std::sqrt(static_cast<double>(levels_a.size()) *
                             static_cast<double>(levels_b.size()));
    score.mapped = std::min(score.mapped, 1.0);
    score.raw = 2.0 * score.mapped - 1.0;
    score.defined = true;
    return score;
}

SimilarityScore user_similarity(const UserHistory& a, const UserHistory& b, SimilarityKind kind) {
    return kind == SimilarityKind::pcc ? pcc_similarity(a, b) : overlap_similarity(a, b);
}

}  // namespace dmr
