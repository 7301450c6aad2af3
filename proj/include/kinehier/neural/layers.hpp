#pragma once

#include "kinehier/errors.hpp"
#include "kinehier/neural/autodiff.hpp"
#include "kinehier/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace kinehier::neural {

/// Registers `name.w` (in x out) and `name.b` (out).
template <typename T>
void add_linear(ParameterSet<T>& params, const std::string& name, std::size_t in, std::size_t out) {
    params.add(name + ".w", {in, out});
    params.add(name + ".b", {out});
}

/// He-uniform weights scaled by `gain`, zero bias.
template <typename T>
void init_linear(ParameterSet<T>& params, const std::string& name, Rng& rng, double gain = 1.0) {
    auto& w = params[name + ".w"];
    const double bound = gain * std::sqrt(6.0 / static_cast<double>(w.shape[0]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : w.data) v = static_cast<T>(dist(rng));
    auto& b = params[name + ".b"];
    std::fill(b.data.begin(), b.data.end(), T(0));
}

template <typename T>
Var<T> apply_linear(Tape<T>& tape, const ParameterSet<T>& params, const std::string& name, const Var<T>& x) {
    return linear(x, tape.parameter(params, name + ".w"), tape.parameter(params, name + ".b"));
}

/// Layer names are `prefix.0`, `prefix.1`, ...; widths = {in, hidden..., out}.
template <typename T>
void add_mlp(ParameterSet<T>& params, const std::string& prefix, const std::vector<std::size_t>& widths) {
    if (widths.size() < 2) throw ConfigError("mlp needs at least an input and an output width");
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        if (widths[i] == 0 || widths[i + 1] == 0) throw ConfigError("mlp widths must be positive");
        add_linear(params, prefix + "." + std::to_string(i), widths[i], widths[i + 1]);
    }
}

/// Hidden layers He-uniform; the last layer is scaled by `out_gain`.
template <typename T>
void init_mlp(ParameterSet<T>& params, const std::string& prefix, std::size_t layers, Rng& rng, double out_gain = 1.0) {
    for (std::size_t i = 0; i < layers; ++i)
        init_linear(params, prefix + "." + std::to_string(i), rng, i + 1 == layers ? out_gain : 1.0);
}

/// ReLU between layers; after the last one only when `relu_last`.
template <typename T>
Var<T> apply_mlp(Tape<T>& tape, const ParameterSet<T>& params, const std::string& prefix, std::size_t layers,
                 Var<T> x, bool relu_last = false) {
    for (std::size_t i = 0; i < layers; ++i) {
        x = apply_linear(tape, params, prefix + "." + std::to_string(i), x);
        if (i + 1 < layers || relu_last) x = relu(x);
    }
    return x;
}

/// Shared per-point MLP (ReLU on every layer) then column max per part.
/// `points` stacks all parts; part p owns rows [offsets[p], offsets[p+1]).
template <typename T>
Var<T> pointnet_encode(Tape<T>& tape, const ParameterSet<T>& params, const std::string& prefix, std::size_t layers,
                       const Var<T>& points, const std::vector<std::size_t>& offsets) {
    for (std::size_t p = 0; p + 1 < offsets.size(); ++p) {
        if (offsets[p + 1] <= offsets[p]) throw EmptyPartError("pointnet_encode: part has no points");
    }
    if (points.rows() == 0) throw EmptyPartError("pointnet_encode: no points");
    return segment_max(apply_mlp(tape, params, prefix, layers, points, true), offsets);
}

/// Nodes of several graphs stacked; graph g owns nodes [offsets[g], offsets[g+1]).
struct GraphBatch {
    std::size_t node_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // u < v, sorted
    std::vector<std::size_t> offsets{0, 0};

    std::size_t graph_count() const { return offsets.size() - 1; }

    std::vector<std::vector<std::size_t>> neighbors() const {
        std::vector<std::vector<std::size_t>> adj(node_count);
        for (const auto& [u, v] : edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        for (auto& a : adj) std::sort(a.begin(), a.end());
        return adj;
    }

    std::size_t graph_of(std::size_t node) const {
        return static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), node) - offsets.begin()) - 1;
    }
};

/// Throws ShapeError on out-of-range or cross-graph edges, non-canonical
/// pairs, or offsets that do not cover the nodes.
inline void check_graph_batch(const GraphBatch& b) {
    if (b.offsets.size() < 2 || b.offsets.front() != 0 || b.offsets.back() != b.node_count)
        throw ShapeError("graph batch offsets do not cover the nodes");
    if (!std::is_sorted(b.offsets.begin(), b.offsets.end())) throw ShapeError("graph batch offsets not sorted");
    for (const auto& [u, v] : b.edges) {
        if (u >= v) throw ShapeError("graph batch edge is not canonical (u < v)");
        if (v >= b.node_count) throw ShapeError("graph batch edge endpoint out of range");
        if (b.graph_of(u) != b.graph_of(v)) throw ShapeError("graph batch edge crosses graphs");
    }
}

/// Stacks graphs in order; node and edge ids of graph g shift by its offset.
inline GraphBatch concat_batches(const std::vector<GraphBatch>& graphs) {
    GraphBatch out;
    out.offsets = {0};
    for (const auto& g : graphs) {
        const std::size_t base = out.node_count;
        for (const auto& [u, v] : g.edges) out.edges.emplace_back(u + base, v + base);
        for (std::size_t k = 1; k < g.offsets.size(); ++k) out.offsets.push_back(base + g.offsets[k]);
        out.node_count += g.node_count;
    }
    return out;
}

/// h' = ReLU(h W_self + mean_neighbors(h) W_neigh + b).
template <typename T>
void add_sage_conv(ParameterSet<T>& params, const std::string& name, std::size_t in, std::size_t out) {
    params.add(name + ".w_self", {in, out});
    params.add(name + ".w_neigh", {in, out});
    params.add(name + ".b", {out});
}

template <typename T>
void init_sage_conv(ParameterSet<T>& params, const std::string& name, Rng& rng) {
    for (const char* w : {".w_self", ".w_neigh"}) {
        auto& t = params[name + w];
        const double bound = std::sqrt(3.0 / static_cast<double>(t.shape[0]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : t.data) v = static_cast<T>(dist(rng));
    }
    auto& b = params[name + ".b"];
    std::fill(b.data.begin(), b.data.end(), T(0));
}

template <typename T>
Var<T> sage_conv(Tape<T>& tape, const ParameterSet<T>& params, const std::string& name, const GraphBatch& batch,
                 const Var<T>& h) {
    if (h.rows() != batch.node_count) throw ShapeError("sage_conv: feature rows != node count");
    const auto w_self = tape.parameter(params, name + ".w_self");
    if (h.cols() != w_self.rows()) throw ShapeError("sage_conv: feature width does not match weights");
    const auto self = linear(h, w_self, tape.parameter(params, name + ".b"));
    const auto neigh = matmul(mean_neighbors(h, batch.neighbors()), tape.parameter(params, name + ".w_neigh"));
    return relu(add(self, neigh));
}

/// Score weights `name.w` (F x 2, columns act on the two endpoints) and `name.b`.
template <typename T>
void add_edge_pool(ParameterSet<T>& params, const std::string& name, std::size_t features) {
    params.add(name + ".w", {features, 2});
    params.add(name + ".b", {1});
}

template <typename T>
void init_edge_pool(ParameterSet<T>& params, const std::string& name, Rng& rng) {
    auto& w = params[name + ".w"];
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.shape[0]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : w.data) v = static_cast<T>(dist(rng));
    params[name + ".b"].data[0] = T(0);
}

template <typename T>
struct PoolResult {
    GraphBatch batch;
    Var<T> features;
    std::vector<std::size_t> record;  // original node -> pooled node
    std::vector<T> gates;             // s per original edge
};

namespace detail {

/// out[p] = h[single] or s_e * (h_u + h_v) / 2 for merged pairs.
template <typename T>
Var<T> collapse_rows(const Var<T>& h, const Var<T>& s, std::vector<std::array<std::size_t, 3>> groups) {
    // group = {u, v, edge}; v == u marks a pass-through node.
    const std::size_t f = h.cols();
    auto& tape = h.tape();
    std::vector<T> out(groups.size() * f);
    const auto hv = h.values();
    const auto sv = s.values();
    for (std::size_t p = 0; p < groups.size(); ++p) {
        const auto [u, v, e] = groups[p];
        for (std::size_t c = 0; c < f; ++c) {
            out[p * f + c] = u == v ? hv[u * f + c] : sv[e] * (hv[u * f + c] + hv[v * f + c]) / T(2);
        }
    }
    auto y = tape.op(groups.size(), f, std::move(out), {h, s});
    tape.set_backward(y, [h, s, y, groups = std::move(groups), f] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        const auto hv = h.values();
        const auto sv = s.values();
        std::vector<T>* gh = t.needs_grad(h) ? &t.grad_of(h) : nullptr;
        std::vector<T>* gs = t.needs_grad(s) ? &t.grad_of(s) : nullptr;
        for (std::size_t p = 0; p < groups.size(); ++p) {
            const auto [u, v, e] = groups[p];
            if (u == v) {
                if (gh)
                    for (std::size_t c = 0; c < f; ++c) (*gh)[u * f + c] += dy[p * f + c];
                continue;
            }
            T acc = T(0);
            for (std::size_t c = 0; c < f; ++c) {
                const T d = dy[p * f + c];
                if (gh) {
                    (*gh)[u * f + c] += sv[e] / T(2) * d;
                    (*gh)[v * f + c] += sv[e] / T(2) * d;
                }
                acc += d * (hv[u * f + c] + hv[v * f + c]) / T(2);
            }
            if (gs) (*gs)[e] += acc;
        }
    });
    return y;
}

} // namespace detail

/// Learned edge collapse. The raw score averages w.[h_u; h_v] and
/// w.[h_v; h_u] so it does not depend on which endpoint has the lower id.
/// Edges are taken in descending gate order (ties: edge order) and collapse
/// when both endpoints are still free. Pooled ids follow the lowest
/// original id of each group, so graphs stay contiguous in the batch.
template <typename T>
PoolResult<T> edge_pool(Tape<T>& tape, const ParameterSet<T>& params, const std::string& name, const GraphBatch& batch,
                        const Var<T>& h) {
    if (h.rows() != batch.node_count) throw ShapeError("edge_pool: feature rows != node count");
    const std::size_t n = batch.node_count;
    const std::size_t m = batch.edges.size();
    PoolResult<T> res;
    if (m == 0) {
        res.batch = batch;
        res.features = h;
        res.record.resize(n);
        std::iota(res.record.begin(), res.record.end(), std::size_t{0});
        return res;
    }
    const auto w = tape.parameter(params, name + ".w");
    if (w.rows() != h.cols()) throw ShapeError("edge_pool: feature width does not match weights");
    const auto half = tape.constant(2, 1, {T(0.5), T(0.5)});
    const auto q = matmul(matmul(h, w), half);  // n x 1
    std::vector<std::size_t> us(m), vs(m);
    for (std::size_t e = 0; e < m; ++e) std::tie(us[e], vs[e]) = batch.edges[e];
    const auto pair_sum = add(gather_rows(q, us), gather_rows(q, vs));
    const auto r = linear(pair_sum, tape.constant(1, 1, {T(1)}), tape.parameter(params, name + ".b"));
    const auto s = affine(tanh(r), T(1), T(1));
    const auto sv = s.values();
    res.gates.assign(sv.begin(), sv.end());

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sv[a] > sv[b]; });
    constexpr std::size_t kFree = static_cast<std::size_t>(-1);
    std::vector<std::size_t> partner(n, kFree), via(n, kFree);
    for (auto e : order) {
        const auto [u, v] = batch.edges[e];
        if (partner[u] != kFree || partner[v] != kFree) continue;
        partner[u] = v;
        partner[v] = u;
        via[u] = via[v] = e;
    }
    res.record.assign(n, kFree);
    std::vector<std::array<std::size_t, 3>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        if (res.record[i] != kFree) continue;
        res.record[i] = groups.size();
        if (partner[i] == kFree) {
            groups.push_back({i, i, 0});
        } else {
            res.record[partner[i]] = groups.size();
            groups.push_back({i, partner[i], via[i]});
        }
    }
    res.batch.node_count = groups.size();
    res.batch.offsets.assign(batch.offsets.size(), 0);
    for (const auto& grp : groups) {
        for (std::size_t g = batch.graph_of(grp[0]) + 1; g < batch.offsets.size(); ++g) ++res.batch.offsets[g];
    }
    for (const auto& [u, v] : batch.edges) {
        auto a = res.record[u], b = res.record[v];
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        res.batch.edges.emplace_back(a, b);
    }
    std::sort(res.batch.edges.begin(), res.batch.edges.end());
    res.batch.edges.erase(std::unique(res.batch.edges.begin(), res.batch.edges.end()), res.batch.edges.end());
    res.features = detail::collapse_rows(h, s, std::move(groups));
    return res;
}

/// Copies each pooled row back to the original nodes that collapsed into it.
template <typename T>
Var<T> edge_unpool(const Var<T>& pooled, const std::vector<std::size_t>& record) {
    for (auto p : record)
        if (p >= pooled.rows()) throw ShapeError("edge_unpool: record points past the pooled rows");
    return gather_rows(pooled, record);
}

/// Composes collapse records: original -> after first pool -> after second ...
inline std::vector<std::size_t> compose_records(const std::vector<std::size_t>& first,
                                                const std::vector<std::size_t>& second) {
    std::vector<std::size_t> out(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        if (first[i] >= second.size()) throw ShapeError("collapse records do not chain");
        out[i] = second[first[i]];
    }
    return out;
}

} // namespace kinehier::neural
