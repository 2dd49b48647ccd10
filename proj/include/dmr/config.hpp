#pragma once

#include <cstdint>
#include <string>

#include "dmr/model.hpp"
#include "dmr/neighbor_index.hpp"
#include "dmr/trainer.hpp"

namespace dmr {

/// Every tunable across the pipeline, with one top-level seed. Serializes to
/// a flat key=value file; unknown keys are rejected on load.
struct RunConfig {
    // implicit user network
    std::size_t k = 1;
    std::size_t g = 200;
    double tau = 0.5;
    std::size_t n_max = 20;
    std::string similarity = "pcc";
    std::size_t future_cap = 100;

    // model
    std::size_t dim = 32;
    std::size_t trends = 6;
    double time_power = 1.0;
    double time_scale = 0.0;  // 0: resolve to the train-log time span
    double neg_weight = 0.5;

    // training
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    double l2_reg = 1e-4;
    std::size_t epochs = 20;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t neg_sample_ratio = 4;

    // evaluation
    std::size_t eval_n = 50;
    std::size_t candidate_pool = 100;

    // data
    double split_fraction = 0.8;
    std::uint64_t seed = 1;

    void validate() const;  // throws UsageError naming the bad field

    NeighborParams neighbor_params() const;
    ModelConfig model_config(double resolved_time_scale) const;
    TrainConfig train_config() const;
    EvalOptions eval_options() const;

    /// Canonical key=value text, keys sorted; stable across runs.
    std::string serialize() const;
    /// Parses `serialize` output (or any flat key=value file). Unknown keys
    /// and malformed values throw UsageError. Missing keys keep defaults.
    static RunConfig parse_text(const std::string& text);
    static RunConfig load(const std::string& path);

    /// FNV-1a hash of the canonical serialization, as fixed-width hex.
    std::string hash() const;
};

}  // namespace dmr
