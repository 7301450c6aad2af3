#pragma once

#include "kinehier/labelnet/config.hpp"
#include "kinehier/labelnet/sample.hpp"
#include "kinehier/neural/layers.hpp"

#include <string>
#include <vector>

namespace kinehier::labelnet {

using neural::GraphBatch;
using neural::ParameterSet;
using neural::Tape;
using neural::Var;

inline constexpr const char* kEncoder = "encoder";
inline constexpr const char* kDecoder = "decoder";
inline constexpr const char* kMotionHead = "head.motion";
inline constexpr const char* kRootHead = "head.root";
inline constexpr const char* kExistHead = "head.exist";
inline constexpr const char* kDirectionHead = "head.direction";

inline std::string conv_name(std::size_t stage) { return "gnn.conv" + std::to_string(stage); }
inline std::string pool_name(std::size_t stage) { return "gnn.pool" + std::to_string(stage); }

template <typename T>
void register_encoder(ParameterSet<T>& p, const ModelConfig& c) {
    std::vector<std::size_t> widths{3};
    widths.insert(widths.end(), c.encoder_widths.begin(), c.encoder_widths.end());
    neural::add_mlp(p, kEncoder, widths);
}

template <typename T>
void register_decoder(ParameterSet<T>& p, const ModelConfig& c) {
    neural::add_mlp(p, kDecoder, {c.encoder_dim(), c.decoder_width, 3 * c.decoder_points});
}

/// Full model: encoder, GNN stages, the four heads, and the autoencoder
/// decoder (kept so a checkpoint holds everything pretraining produced).
template <typename T>
void register_model(ParameterSet<T>& p, const ModelConfig& c) {
    register_encoder(p, c);
    std::size_t in = c.node_input_dim();
    for (std::size_t s = 0; s < c.stages; ++s) {
        neural::add_sage_conv(p, conv_name(s), in, c.stage_width);
        neural::add_edge_pool(p, pool_name(s), c.stage_width);
        in = c.stage_width;
    }
    const std::size_t f = c.feature_dim();
    neural::add_mlp(p, kMotionHead, {f, c.head_width, static_cast<std::size_t>(kMotionTypeCount)});
    neural::add_mlp(p, kRootHead, {f, c.head_width, 1});
    neural::add_mlp(p, kExistHead, {2 * f, c.head_width, 1});
    neural::add_mlp(p, kDirectionHead, {2 * f, c.head_width, 1});
    register_decoder(p, c);
}

/// Head output layers start at a tenth of the He scale so untrained
/// predictions sit near uniform.
template <typename T>
void init_model(ParameterSet<T>& p, const ModelConfig& c, Rng& rng) {
    neural::init_mlp(p, kEncoder, c.encoder_widths.size(), rng);
    for (std::size_t s = 0; s < c.stages; ++s) {
        neural::init_sage_conv(p, conv_name(s), rng);
        neural::init_edge_pool(p, pool_name(s), rng);
    }
    for (const char* head : {kMotionHead, kRootHead, kExistHead, kDirectionHead}) neural::init_mlp(p, head, 2, rng, 0.1);
    neural::init_mlp(p, kDecoder, 2, rng);
}

ParameterSet<float> make_model(const ModelConfig& config);

/// Several samples stacked into one forward pass.
template <typename T>
struct BatchInput {
    std::vector<T> points;                 // all parts x samples x 3
    std::vector<std::size_t> point_offsets;
    std::vector<T> descriptors;            // nodes x 6
    GraphBatch graph;
    std::vector<std::size_t> edge_offsets; // graph g owns edges [edge_offsets[g], edge_offsets[g+1])
};

template <typename T>
BatchInput<T> assemble_batch(const std::vector<const GraphSample*>& samples, std::size_t samples_per_part) {
    BatchInput<T> b;
    b.point_offsets = {0};
    b.edge_offsets = {0};
    std::vector<GraphBatch> graphs;
    for (const auto* s : samples) {
        for (float v : s->points) b.points.push_back(static_cast<T>(v));
        for (float v : s->descriptors) b.descriptors.push_back(static_cast<T>(v));
        for (std::size_t p = 0; p < s->part_count(); ++p)
            b.point_offsets.push_back(b.point_offsets.back() + samples_per_part);
        GraphBatch g;
        g.node_count = s->part_count();
        g.offsets = {0, g.node_count};
        for (const auto& e : s->graph.edges)
            g.edges.emplace_back(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v));
        graphs.push_back(std::move(g));
        b.edge_offsets.push_back(b.edge_offsets.back() + s->graph.edges.size());
    }
    b.graph = neural::concat_batches(graphs);
    if (b.points.size() != 3 * b.point_offsets.back())
        throw ShapeError("sample point count does not match samples_per_part");
    return b;
}

template <typename T>
struct ModelOutputs {
    Var<T> node_features;  // nodes x (x_dim)
    Var<T> y;              // nodes x feature_dim
    Var<T> motion;         // nodes x 4 logits
    Var<T> root;           // nodes x 1 logits
    Var<T> exist;          // edges x 1 logits
    Var<T> direction;      // edges x 1 logits for u -> v
};

/// PointNet codes plus centroid/extents descriptors.
template <typename T>
Var<T> encode_nodes(Tape<T>& tape, const ParameterSet<T>& p, const ModelConfig& c, const BatchInput<T>& b) {
    const auto pts = tape.constant(b.point_offsets.back(), 3, b.points);
    const auto code = neural::pointnet_encode(tape, p, kEncoder, c.encoder_widths.size(), pts, b.point_offsets);
    const auto desc = tape.constant(b.graph.node_count, 6, b.descriptors);
    return neural::concat_cols(std::vector<Var<T>>{code, desc});
}

/// Stages of conv -> pool at progressively pooled resolution; every conv and
/// pool output is brought back to the input nodes and concatenated.
template <typename T>
Var<T> gnn_forward(Tape<T>& tape, const ParameterSet<T>& p, const ModelConfig& c, const GraphBatch& graph,
                   const Var<T>& x) {
    std::vector<Var<T>> convs, pools;
    GraphBatch g = graph;
    Var<T> h = x;
    std::vector<std::size_t> chain(graph.node_count);
    for (std::size_t i = 0; i < chain.size(); ++i) chain[i] = i;
    for (std::size_t s = 0; s < c.stages; ++s) {
        const auto conv = neural::sage_conv(tape, p, conv_name(s), g, h);
        convs.push_back(s == 0 ? conv : neural::edge_unpool(conv, chain));
        auto pooled = neural::edge_pool(tape, p, pool_name(s), g, conv);
        chain = neural::compose_records(chain, pooled.record);
        pools.push_back(neural::edge_unpool(pooled.features, chain));
        g = std::move(pooled.batch);
        h = pooled.features;
    }
    convs.insert(convs.end(), pools.begin(), pools.end());
    return neural::concat_cols(convs);
}

/// MLP on [y_u; y_v] with the first layer split so y is projected once per
/// node: returns (f([y_u; y_v]), f([y_v; y_u])).
template <typename T>
std::pair<Var<T>, Var<T>> pair_head(Tape<T>& tape, const ParameterSet<T>& p, const std::string& name, const Var<T>& y,
                                    const std::vector<std::size_t>& us, const std::vector<std::size_t>& vs) {
    const auto w = tape.parameter(p, name + ".0.w");
    const auto b = tape.parameter(p, name + ".0.b");
    const std::size_t f = y.cols();
    const auto a = neural::matmul(y, neural::slice_rows(w, 0, f));
    const auto z = neural::matmul(y, neural::slice_rows(w, f, f));
    auto first = [&](const std::vector<std::size_t>& left, const std::vector<std::size_t>& right) {
        const auto sum = neural::add(neural::gather_rows(a, left), neural::gather_rows(z, right));
        const auto ones = tape.constant(left.size(), 1, std::vector<T>(left.size(), T(1)));
        return neural::relu(neural::add(sum, neural::matmul(ones, b)));
    };
    auto second = [&](const Var<T>& h) { return neural::apply_linear(tape, p, name + ".1", h); };
    return {second(first(us, vs)), second(first(vs, us))};
}

/// Fills the four head outputs from `out.y`.
template <typename T>
void apply_heads(Tape<T>& tape, const ParameterSet<T>& p, const GraphBatch& graph, ModelOutputs<T>& out) {
    out.motion = neural::apply_mlp(tape, p, kMotionHead, 2, out.y);
    out.root = neural::apply_mlp(tape, p, kRootHead, 2, out.y);
    std::vector<std::size_t> us, vs;
    for (const auto& [u, v] : graph.edges) {
        us.push_back(u);
        vs.push_back(v);
    }
    if (us.empty()) {
        out.exist = tape.constant(0, 1, {});
        out.direction = tape.constant(0, 1, {});
        return;
    }
    // Existence is symmetric in the endpoints, direction antisymmetric, so
    // swapping the canonical order leaves p_exist unchanged and maps p_dir to 1 - p_dir.
    const auto [e_uv, e_vu] = pair_head(tape, p, kExistHead, out.y, us, vs);
    out.exist = neural::affine(neural::add(e_uv, e_vu), T(0.5));
    const auto [d_uv, d_vu] = pair_head(tape, p, kDirectionHead, out.y, us, vs);
    out.direction = neural::add(d_uv, neural::affine(d_vu, T(-1)));
}

template <typename T>
ModelOutputs<T> forward(Tape<T>& tape, const ParameterSet<T>& p, const ModelConfig& c, const BatchInput<T>& b) {
    ModelOutputs<T> out;
    out.node_features = encode_nodes(tape, p, c, b);
    out.y = gnn_forward(tape, p, c, b.graph, out.node_features);
    apply_heads(tape, p, b.graph, out);
    return out;
}

/// Weighted sum of the four training terms for a batch; each term is a mean
/// over its items (nodes, graphs, candidate edges, tree edges). Terms with
/// zero weight are left off the tape.
template <typename T>
Var<T> batch_loss(Tape<T>& tape, const ModelOutputs<T>& out, const BatchInput<T>& b,
                  const std::vector<const GraphTargets*>& targets, const LossWeights& w) {
    std::vector<std::size_t> motion, roots;
    std::vector<T> exist, direction;
    std::vector<std::size_t> dir_rows;
    for (std::size_t g = 0; g < targets.size(); ++g) {
        const auto& t = *targets[g];
        motion.insert(motion.end(), t.motion.begin(), t.motion.end());
        roots.push_back(t.root);
        for (float e : t.exist) exist.push_back(static_cast<T>(e));
        for (std::size_t k = 0; k < t.dir_edges.size(); ++k) {
            dir_rows.push_back(b.edge_offsets[g] + t.dir_edges[k]);
            direction.push_back(static_cast<T>(t.direction[k]));
        }
    }
    Var<T> total = tape.constant(1, 1, {T(0)});
    if (w.motion != 0) total = neural::add(total, neural::affine(neural::cross_entropy(out.motion, motion), T(w.motion)));
    if (w.root != 0)
        total = neural::add(total, neural::affine(neural::segment_softmax_cross_entropy(out.root, b.graph.offsets, roots),
                                                  T(w.root)));
    if (w.exist != 0 && !exist.empty())
        total = neural::add(total, neural::affine(neural::bce_with_logits(out.exist, exist), T(w.exist)));
    if (w.direction != 0 && !direction.empty())
        total = neural::add(total, neural::affine(neural::bce_with_logits(neural::gather_rows(out.direction, dir_rows),
                                                                          direction),
                                                  T(w.direction)));
    return total;
}

} // namespace kinehier::labelnet
