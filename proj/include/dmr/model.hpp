#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "dmr/future_sequence.hpp"
#include "dmr/mat.hpp"
#include "dmr/types.hpp"

namespace dmr {

/// A trend is considered unassigned (sentinel mean time) when the soft
/// assignment mass routed to it falls below this.
inline constexpr double kTrendWeightFloor = 1e-8;

struct ModelConfig {
    std::size_t dim = 32;       // shared user/item embedding dimension
    std::size_t trends = 6;     // trend groups per half
    double time_power = 1.0;    // decay exponent rho
    double time_scale = 1.0;    // decay scale tau_time (> 0)
    double neg_weight = 0.5;    // lambda for the negative-trend score

    void validate() const;
};

/// All trainable tensors plus the non-trainable scoring constants.
struct ModelParams {
    std::size_t dim = 0;
    std::size_t trends = 0;
    double time_power = 1.0;
    double time_scale = 1.0;
    double neg_weight = 0.5;

    std::vector<ItemId> vocab;  // sorted; embedding row i belongs to vocab[i]
    Mat item_embeddings;        // |V| x d
    Mat trend_init;             // s x d, shared across users
    Mat coattention;            // d x d
    Mat fusion_projection;      // 2d x d

    static ModelParams init(std::vector<ItemId> vocab, const ModelConfig& config,
                            std::uint64_t seed);

    std::optional<std::size_t> index_of(ItemId item) const;
    void check_finite() const;  // throws NumericError naming the tensor

    /// Rebuilds the item -> row lookup; call after assigning `vocab` directly.
    void rebuild_vocab_index();

    bool operator==(const ModelParams& other) const;

private:
    std::unordered_map<ItemId, std::size_t> vocab_index_;
};

/// One sequence element entering the routing stage.
struct SequenceItem {
    std::size_t item_index = 0;  // row in item_embeddings
    double timestamp = 0.0;
};

/// One routed trend group (a history or future half of the trend memory),
/// with the intermediates the backward pass needs.
struct TrendGroup {
    Mat rows;                          // s x d updated trend rows t'_j
    std::vector<double> mean_time;     // s, valid where active
    std::vector<bool> active;          // assignment mass >= kTrendWeightFloor
    Mat weights;                       // |seq| x s soft assignment w_{m,j}
    std::vector<double> total_weight;  // s, S_j = sum_m w_{m,j}
    std::vector<double> weighted_time; // s, P_j = sum_m w_{m,j} * t_m
    std::size_t seq_len = 0;

    bool any_active() const;
};

/// Two-stage routing: soft-assign every item to the shared trend rows via the
/// bilinear co-attention weight softmax(x . C t / sqrt(d)), then update each
/// row additively with its assigned mass.
TrendGroup route_trends(const std::vector<SequenceItem>& seq, const ModelParams& params);

/// Weighted mean of the sequence embeddings under one trend's assignment
/// weights: sum_m w_m x_m / max(sum_m w_m, 1e-8).
std::vector<double> item_level_attention(const std::vector<SequenceItem>& seq,
                                         std::span<const double> weights,
                                         const ModelParams& params);

struct TimeAttentionDetail {
    std::vector<double> weights;  // s, zero for inactive trends unless fallback
    bool fallback = false;        // no active trend: unit weight on every row
};

/// Activates trend rows by temporal proximity of their mean interaction time
/// to the query time: logit_j = -(|t_q - mean_j| / tau)^rho over the active
/// trends. With no active trend every row passes through with weight one,
/// which makes the output the plain sum pool of the rows.
std::vector<double> trend_time_attention(const TrendGroup& group, double query_time,
                                         const ModelParams& params,
                                         TimeAttentionDetail* detail = nullptr);

struct UserRepresentation {
    std::vector<double> history_vec;  // d
    std::vector<double> future_vec;   // d
    std::vector<double> fused;        // d, projection of the concatenation
};

UserRepresentation build_user_representation(const TrendGroup& history, const TrendGroup& future,
                                             double query_time, const ModelParams& params);

/// Routes both halves first; throws UsageError when both sequences are empty.
UserRepresentation build_user_representation(const std::vector<SequenceItem>& history,
                                             const std::vector<SequenceItem>& future,
                                             double query_time, const ModelParams& params);

/// fused_pos . e_i - lambda * (fused_neg . e_i); sigmoid gives the CTR.
double score_item(const UserRepresentation& positive, std::span<const double> item_embedding,
                  const UserRepresentation* negative, const ModelParams& params);

double sigmoid(double z);

/// Softmax over a candidate set's logits: the ranking diagnostic form of the
/// prediction equation. Never applied to the full item universe.
std::vector<double> candidate_softmax(std::span<const double> logits);

/// The four routed sequences of one user (positive/negative, history/future).
struct UserSequences {
    std::vector<SequenceItem> pos_history;
    std::vector<SequenceItem> pos_future;
    std::vector<SequenceItem> neg_history;
    std::vector<SequenceItem> neg_future;

    bool has_positive() const { return !pos_history.empty() || !pos_future.empty(); }
    bool has_negative() const { return !neg_history.empty() || !neg_future.empty(); }
};

UserSequences build_user_sequences(const UserHistory& history, const FutureSequence& future,
                                   const ModelParams& params);

}  // namespace dmr
