#pragma once

#include <span>

#include "dmr/model.hpp"

namespace dmr {

/// Gradients with the same shapes as the trainable tensors in ModelParams.
struct ModelGrads {
    Mat item_embeddings;
    Mat trend_init;
    Mat coattention;
    Mat fusion_projection;

    static ModelGrads zeros_like(const ModelParams& params);
    void zero();
    void check_finite() const;  // throws NumericError naming the tensor
};

struct TrainSample {
    std::size_t item_index = 0;
    bool label = false;
    double query_time = 0.0;
};

struct BatchResult {
    double bce = 0.0;       // summed stable binary cross-entropy
    double reg_term = 0.0;  // l2_reg * ||params||^2 (0 when disabled)
    std::size_t samples = 0;

    double loss() const { return bce + reg_term; }
};

/// Numerically stable binary cross-entropy over (logit, label) samples.
double bce_loss(std::span<const std::pair<double, int>> samples);

/// Squared L2 norm over all trainable tensors.
double l2_penalty(const ModelParams& params);

/// Forward pass over one user's samples; when `grads` is non-null also
/// accumulates the exact reverse-mode gradients of bce + l2_reg * ||params||^2
/// with respect to every trainable tensor. Representations are routed once
/// per batch; time attention and fusion are per sample because each sample
/// carries its own query time.
BatchResult run_batch(const UserSequences& seqs, std::span<const TrainSample> samples,
                      const ModelParams& params, double l2_reg, ModelGrads* grads);

}  // namespace dmr
