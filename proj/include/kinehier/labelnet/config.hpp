#pragma once

#include "kinehier/io/json_io.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace kinehier::labelnet {

inline constexpr int kConfigFormatVersion = 1;

struct LossWeights {
    double motion = 1.0;
    double root = 1.0;
    double exist = 1.0;
    double direction = 1.0;
};

struct ModelConfig {
    std::vector<std::size_t> encoder_widths{64, 128, 128};  // after the xyz input
    std::size_t stage_width = 128;
    std::size_t stages = 3;
    std::size_t samples_per_part = 256;
    std::size_t head_width = 64;
    std::size_t decoder_width = 256;
    std::size_t decoder_points = 256;
    LossWeights weights;

    int pretrain_epochs = 500;
    double pretrain_lr = 1e-3;
    double pretrain_momentum = 0.9;
    std::size_t pretrain_batch = 16;
    /// Upper bound on the part point sets drawn from the training records.
    std::size_t pretrain_parts = 2048;

    int train_epochs = 30;
    double train_lr = 1e-3;
    std::size_t batch_size = 8;
    bool freeze_encoder = false;

    std::uint64_t seed = 0;

    std::size_t encoder_dim() const { return encoder_widths.back(); }
    std::size_t node_input_dim() const { return encoder_dim() + 6; }
    std::size_t feature_dim() const { return 2 * stages * stage_width; }
};

/// Throws ConfigError for non-positive widths, counts or rates.
void check_config(const ModelConfig& config);

Json config_to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig config_from_json(const Json& j);

} // namespace kinehier::labelnet
