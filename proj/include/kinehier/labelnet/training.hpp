#pragma once

#include "kinehier/labelnet/config.hpp"
#include "kinehier/labelnet/sample.hpp"
#include "kinehier/neural/tensor.hpp"

#include <filesystem>
#include <functional>
#include <vector>

namespace kinehier::labelnet {

/// Called after every epoch with (epoch index, mean loss).
using EpochCallback = std::function<void(int, double)>;

struct PretrainResult {
    neural::ParameterSet<float> params;  // encoder and decoder
    std::vector<double> loss_curve;      // mean batch Chamfer per epoch
    double initial_loss = 0.0;           // mean Chamfer at initialization
};

/// Part point sets (each samples_per_part x 3) drawn from the samples: all
/// parts, shuffled by the config seed, truncated to config.pretrain_parts.
std::vector<std::vector<float>> pretrain_parts(const std::vector<GraphSample>& samples, const ModelConfig& config);

/// Autoencoder pretraining of the PointNet encoder with a Chamfer loss and
/// Nesterov SGD. Throws ConfigError on an empty set.
PretrainResult pretrain_encoder(const std::vector<std::vector<float>>& parts, const ModelConfig& config,
                                const EpochCallback& on_epoch = {});

/// Mean Chamfer of the autoencoder over `parts`.
double autoencoder_loss(const std::vector<std::vector<float>>& parts, const neural::ParameterSet<float>& params,
                        const ModelConfig& config);

struct TrainResult {
    neural::ParameterSet<float> params;
    std::vector<double> loss_curve;  // mean batch loss per epoch
};

/// Adam over shuffled batches of config.batch_size graphs. `initial` (may be
/// empty) seeds parameters with matching names, e.g. a pretrained encoder.
TrainResult train(const std::vector<GraphSample>& samples, const ModelConfig& config,
                  const neural::ParameterSet<float>& initial, const EpochCallback& on_epoch = {});

/// Mean of the training objective over the samples, in fixed batches.
double evaluate_loss(const std::vector<GraphSample>& samples, const neural::ParameterSet<float>& params,
                     const ModelConfig& config);

/// Writes `path` (KTNN parameters) and `path` + ".json" (config, seed, loss
/// curves, format versions).
void save_checkpoint(const std::filesystem::path& path, const neural::ParameterSet<float>& params,
                     const ModelConfig& config, const std::vector<double>& pretrain_curve,
                     const std::vector<double>& train_curve);

struct Checkpoint {
    ModelConfig config;
    neural::ParameterSet<float> params;
    std::vector<double> pretrain_curve;
    std::vector<double> train_curve;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

} // namespace kinehier::labelnet
