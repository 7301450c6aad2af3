#pragma once

#include "kinehier/graphbuild/part_graph.hpp"
#include "kinehier/labelnet/config.hpp"
#include "kinehier/labelnet/sample.hpp"
#include "kinehier/neural/tensor.hpp"

#include <array>
#include <vector>

namespace kinehier::labelnet {

/// Per-node and per-candidate-edge probabilities over a PartGraph.
struct LabeledGraph {
    graphbuild::PartGraph base;
    std::vector<int> part_ids;                        // node -> source cloud label
    std::vector<std::array<double, kMotionTypeCount>> motion;
    std::vector<double> root;                         // per-graph softmax, sums to 1
    std::vector<double> exist;                        // per edge of base.edges
    std::vector<double> direction;                    // P(u -> v) for canonical (u, v)
};

/// Throws ValidationError when sizes disagree with the base graph, any
/// probability leaves [0, 1], or a distribution does not sum to 1 within 1e-5.
void check_labeled_graph(const LabeledGraph& labeled);

/// Numeric counterpart of the training objective evaluated on probabilities
/// (clamped before every log), with the same per-term averaging.
double prediction_loss(const LabeledGraph& labeled, const GraphTargets& targets, const LossWeights& weights);

/// Runs the model on each sample; independent samples share nothing, so
/// batching does not change the numbers beyond float rounding order.
std::vector<LabeledGraph> predict(const std::vector<const GraphSample*>& samples,
                                  const neural::ParameterSet<float>& params, const ModelConfig& config);
LabeledGraph predict(const GraphSample& sample, const neural::ParameterSet<float>& params, const ModelConfig& config);

/// Probabilities taken straight from the targets (1 - eps / eps): an oracle
/// used to exercise extraction and metrics.
LabeledGraph oracle_labels(const GraphSample& sample);

} // namespace kinehier::labelnet
