#pragma once

#include <cstdint>

#include "dmr/gradients.hpp"
#include "dmr/model.hpp"

namespace dmr {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

/// First/second-moment accumulators mirroring the trainable tensor shapes.
struct AdamState {
    Mat m_item_embeddings, v_item_embeddings;
    Mat m_trend_init, v_trend_init;
    Mat m_coattention, v_coattention;
    Mat m_fusion_projection, v_fusion_projection;
    std::uint64_t step = 0;

    static AdamState zeros_like(const ModelParams& params);

    bool operator==(const AdamState&) const = default;
};

/// Standard bias-corrected Adam update over every trainable tensor. Throws
/// NumericError if an updated tensor stops being finite.
void adam_step(ModelParams& params, const ModelGrads& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace dmr
