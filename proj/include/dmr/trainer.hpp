#pragma once

#include <optional>
#include <vector>

#include "dmr/adam.hpp"
#include "dmr/gradients.hpp"
#include "dmr/metrics.hpp"
#include "dmr/model.hpp"
#include "dmr/neighbor_index.hpp"
#include "dmr/split.hpp"

namespace dmr {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    double l2_reg = 1e-4;
    std::size_t epochs = 20;
    std::uint64_t seed = 1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t neg_sample_ratio = 4;  // sampled unobserved negatives per positive
    std::size_t future_cap = 100;      // future-sequence entries per neighbor

    void validate() const;
    AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

struct EpochStats {
    std::size_t epoch = 0;      // 1-based
    double mean_loss = 0.0;     // mean per-sample BCE over the epoch
    double val_auc = 0.0;       // NaN when no validation requested
    std::size_t samples = 0;
};

struct TrainResult {
    std::vector<EpochStats> trace;
    std::size_t users_trained = 0;
    std::size_t users_skipped = 0;  // no usable positive sequence
};

/// Epoch-driven training loop. Users are visited in seeded shuffled order;
/// each user's samples (train positives, train explicit negatives, and
/// sampled unobserved negatives) are scored in batches against
/// representations rebuilt per batch, with one Adam step per batch.
///
/// All randomness is derived from (seed, epoch), so resuming from
/// `start_epoch` with the same config continues an interrupted run exactly.
/// A leakage guard rejects any interaction beyond its owner's train boundary.
TrainResult train(const ChronoSplit& split, const NeighborIndex& index, ModelParams& params,
                  AdamState& adam, const TrainConfig& config, std::size_t start_epoch = 0,
                  const EvalOptions* validation = nullptr);

}  // namespace dmr
