#pragma once

#include <string>

#include "dmr/adam.hpp"
#include "dmr/model.hpp"

namespace dmr {

/// Everything needed to resume training at an epoch boundary. RNG streams
/// are derived from (seed, epoch), so no generator state is stored.
struct Checkpoint {
    ModelParams params;
    AdamState adam;
    bool has_adam = false;
    std::uint64_t completed_epochs = 0;
};

/// Binary little-endian format with a versioned header; the loader verifies
/// the expected byte length before parsing. A text manifest recording the
/// config hash is written next to the checkpoint.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path,
                     const std::string& config_hash = "");
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dmr
