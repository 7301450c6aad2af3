#pragma once

#include "kinehier/errors.hpp"
#include "kinehier/neural/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kinehier::neural {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

template <typename T>
class Tape;

/// Handle to a node on a Tape: a rows x cols matrix.
template <typename T>
class Var {
public:
    Var() = default;
    Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape<T>& tape() const { return *tape_; }
    std::size_t id() const { return id_; }
    std::size_t rows() const { return tape_->node(id_).rows; }
    std::size_t cols() const { return tape_->node(id_).cols; }
    std::size_t size() const { return rows() * cols(); }
    std::span<const T> values() const { return {tape_->node(id_).data(), size()}; }
    T value(std::size_t r = 0, std::size_t c = 0) const { return tape_->node(id_).data()[r * cols() + c]; }
    /// Gradient after Tape::backward; zeros when the node was not reached.
    std::vector<T> grad() const {
        const auto& n = tape_->node(id_);
        return n.grad.empty() ? std::vector<T>(size(), T(0)) : n.grad;
    }
    bool requires_grad() const { return tape_->node(id_).requires_grad; }

private:
    Tape<T>* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Linear record of operations; creation order is a topological order, so
/// backward simply walks the nodes in reverse.
template <typename T>
class Tape {
public:
    struct Node {
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::vector<T> value;
        const T* external = nullptr;
        std::vector<T> grad;
        bool requires_grad = false;
        std::function<void()> backward;

        const T* data() const { return external ? external : value.data(); }
        std::size_t size() const { return rows * cols; }
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Node& node(std::size_t id) { return *nodes_[id]; }
    const Node& node(std::size_t id) const { return *nodes_[id]; }
    std::size_t node_count() const { return nodes_.size(); }

    Var<T> constant(std::size_t rows, std::size_t cols, std::vector<T> data) {
        if (data.size() != rows * cols) throw ShapeError("constant data does not match its shape");
        auto n = std::make_unique<Node>();
        n->rows = rows;
        n->cols = cols;
        n->value = std::move(data);
        return push(std::move(n));
    }

    /// Trainable leaf when `requires_grad`; its gradient is read back by
    /// accumulate_parameter_grads.
    Var<T> leaf(std::size_t rows, std::size_t cols, std::vector<T> data, bool requires_grad) {
        auto v = constant(rows, cols, std::move(data));
        node(v.id()).requires_grad = requires_grad;
        return v;
    }

    /// Leaf bound to a parameter tensor (no copy). One node per parameter per tape.
    Var<T> parameter(const ParameterSet<T>& params, std::size_t index) {
        const auto key = std::pair(&params, index);
        if (auto it = param_nodes_.find(key); it != param_nodes_.end()) return Var<T>(this, it->second);
        const auto& e = params.entry(index);
        auto n = std::make_unique<Node>();
        n->rows = e.tensor.rows();
        n->cols = e.tensor.cols();
        n->external = e.tensor.data.data();
        n->requires_grad = e.trainable;
        auto v = push(std::move(n));
        param_nodes_[key] = v.id();
        return v;
    }

    Var<T> parameter(const ParameterSet<T>& params, const std::string& name) {
        return parameter(params, params.index_of(name));
    }

    /// New node computed from `inputs`; `backward` runs only when some input
    /// needs a gradient.
    Var<T> op(std::size_t rows, std::size_t cols, std::vector<T> value, std::initializer_list<Var<T>> inputs) {
        bool needs = false;
        for (const auto& in : inputs) needs = needs || node(in.id()).requires_grad;
        auto n = std::make_unique<Node>();
        n->rows = rows;
        n->cols = cols;
        n->value = std::move(value);
        n->requires_grad = needs;
        return push(std::move(n));
    }

    Var<T> op(std::size_t rows, std::size_t cols, std::vector<T> value, const std::vector<Var<T>>& inputs) {
        bool needs = false;
        for (const auto& in : inputs) needs = needs || node(in.id()).requires_grad;
        auto n = std::make_unique<Node>();
        n->rows = rows;
        n->cols = cols;
        n->value = std::move(value);
        n->requires_grad = needs;
        return push(std::move(n));
    }

    void set_backward(const Var<T>& v, std::function<void()> fn) {
        if (node(v.id()).requires_grad) node(v.id()).backward = std::move(fn);
    }

    /// Gradient buffer of `v`, zero-initialised on first use.
    std::vector<T>& grad_of(const Var<T>& v) {
        auto& n = node(v.id());
        if (n.grad.empty()) n.grad.assign(n.size(), T(0));
        return n.grad;
    }

    /// Incoming gradient of `v`, or null when nothing flowed into it.
    const std::vector<T>* upstream(const Var<T>& v) const {
        const auto& n = node(v.id());
        return n.grad.empty() ? nullptr : &n.grad;
    }

    bool needs_grad(const Var<T>& v) const { return node(v.id()).requires_grad; }

    void backward(const Var<T>& loss) {
        const auto& ln = node(loss.id());
        if (ln.rows != 1 || ln.cols != 1) throw ShapeError("backward needs a scalar loss");
        grad_of(loss)[0] = T(1);
        for (std::size_t i = loss.id() + 1; i-- > 0;) {
            auto& n = *nodes_[i];
            if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
            n.backward();
        }
    }

    /// Adds leaf gradients into `params` tensors' grad slots (allocating them).
    void accumulate_parameter_grads(ParameterSet<T>& params) const {
        for (const auto& [key, id] : param_nodes_) {
            if (key.first != &params) continue;
            auto& t = params.entry(key.second).tensor;
            if (t.grad.size() != t.size()) t.grad.assign(t.size(), T(0));
            const auto& g = nodes_[id]->grad;
            if (g.empty()) continue;
            for (std::size_t k = 0; k < g.size(); ++k) t.grad[k] += g[k];
        }
    }

private:
    Var<T> push(std::unique_ptr<Node> n) {
        nodes_.push_back(std::move(n));
        return Var<T>(this, nodes_.size() - 1);
    }

    std::vector<std::unique_ptr<Node>> nodes_;
    std::map<std::pair<const ParameterSet<T>*, std::size_t>, std::size_t> param_nodes_;
};

namespace detail {

template <typename T>
ConstMatrixMap<T> cmap(const Var<T>& v) {
    return ConstMatrixMap<T>(v.tape().node(v.id()).data(), static_cast<Eigen::Index>(v.rows()),
                             static_cast<Eigen::Index>(v.cols()));
}

template <typename T>
MatrixMap<T> gmap(const Var<T>& v) {
    auto& g = v.tape().grad_of(v);
    return MatrixMap<T>(g.data(), static_cast<Eigen::Index>(v.rows()), static_cast<Eigen::Index>(v.cols()));
}

template <typename T>
ConstMatrixMap<T> umap(const Var<T>& v) {
    const auto* g = v.tape().upstream(v);
    return ConstMatrixMap<T>(g->data(), static_cast<Eigen::Index>(v.rows()), static_cast<Eigen::Index>(v.cols()));
}

inline void require(bool ok, const char* what) {
    if (!ok) throw ShapeError(what);
}

} // namespace detail

/// a (n x k) times b (k x m).
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
    detail::require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    auto& tape = a.tape();
    std::vector<T> out(a.rows() * b.cols());
    MatrixMap<T>(out.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(b.cols())).noalias() =
        detail::cmap(a) * detail::cmap(b);
    auto y = tape.op(a.rows(), b.cols(), std::move(out), {a, b});
    tape.set_backward(y, [a, b, y] {
        auto& t = y.tape();
        const auto dy = detail::umap(y);
        if (t.needs_grad(a)) detail::gmap(a).noalias() += dy * detail::cmap(b).transpose();
        if (t.needs_grad(b)) detail::gmap(b).noalias() += detail::cmap(a).transpose() * dy;
    });
    return y;
}

/// x (n x k) * w (k x m) + bias (1 x m), fused.
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& bias) {
    detail::require(x.cols() == w.rows(), "linear: input width does not match weight rows");
    detail::require(bias.rows() == 1 && bias.cols() == w.cols(), "linear: bias must be 1 x out");
    auto& tape = x.tape();
    std::vector<T> out(x.rows() * w.cols());
    MatrixMap<T> o(out.data(), static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(w.cols()));
    o.noalias() = detail::cmap(x) * detail::cmap(w);
    o.rowwise() += detail::cmap(bias).row(0);
    auto y = tape.op(x.rows(), w.cols(), std::move(out), {x, w, bias});
    tape.set_backward(y, [x, w, bias, y] {
        auto& t = y.tape();
        const auto dy = detail::umap(y);
        if (t.needs_grad(x)) detail::gmap(x).noalias() += dy * detail::cmap(w).transpose();
        if (t.needs_grad(w)) detail::gmap(w).noalias() += detail::cmap(x).transpose() * dy;
        if (t.needs_grad(bias)) {
            // Row-order loop: Eigen's vectorised column reduction rounds differently with buffer alignment.
            auto& g = t.grad_of(bias);
            const std::size_t cols = y.cols();
            const auto& d = *t.upstream(y);
            for (std::size_t r = 0; r < y.rows(); ++r)
                for (std::size_t c = 0; c < cols; ++c) g[c] += d[r * cols + c];
        }
    });
    return y;
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
    auto& tape = a.tape();
    std::vector<T> out(a.size());
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    auto y = tape.op(a.rows(), a.cols(), std::move(out), {a, b});
    tape.set_backward(y, [a, b, y] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        for (const auto& in : {a, b}) {
            if (!t.needs_grad(in)) continue;
            auto& g = t.grad_of(in);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i];
        }
    });
    return y;
}

/// Elementwise product.
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "mul: shape mismatch");
    auto& tape = a.tape();
    std::vector<T> out(a.size());
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    auto y = tape.op(a.rows(), a.cols(), std::move(out), {a, b});
    tape.set_backward(y, [a, b, y] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        const auto av = a.values();
        const auto bv = b.values();
        if (t.needs_grad(a)) {
            auto& g = t.grad_of(a);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * bv[i];
        }
        if (t.needs_grad(b)) {
            auto& g = t.grad_of(b);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * av[i];
        }
    });
    return y;
}

/// s * a + offset.
template <typename T>
Var<T> affine(const Var<T>& a, T s, T offset = T(0)) {
    auto& tape = a.tape();
    std::vector<T> out(a.size());
    const auto av = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * av[i] + offset;
    auto y = tape.op(a.rows(), a.cols(), std::move(out), {a});
    tape.set_backward(y, [a, y, s] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        auto& g = t.grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * dy[i];
    });
    return y;
}

namespace detail {

template <typename T, typename F, typename D>
Var<T> unary(const Var<T>& a, F f, D dfdy_from_xy) {
    auto& tape = a.tape();
    std::vector<T> out(a.size());
    const auto av = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
    auto y = tape.op(a.rows(), a.cols(), std::move(out), {a});
    tape.set_backward(y, [a, y, dfdy_from_xy] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        const auto xv = a.values();
        const auto yv = y.values();
        auto& g = t.grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * dfdy_from_xy(xv[i], yv[i]);
    });
    return y;
}

} // namespace detail

template <typename T>
Var<T> relu(const Var<T>& a) {
    return detail::unary(a, [](T x) { return x > T(0) ? x : T(0); }, [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
    return detail::unary(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
T stable_sigmoid(T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
    return detail::unary(a, [](T x) { return stable_sigmoid(x); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
    auto& tape = a.tape();
    T s = T(0);
    for (T v : a.values()) s += v;
    auto y = tape.op(1, 1, {s}, {a});
    tape.set_backward(y, [a, y] {
        auto& t = y.tape();
        const T dy = (*t.upstream(y))[0];
        for (auto& g : t.grad_of(a)) g += dy;
    });
    return y;
}

template <typename T>
Var<T> mean(const Var<T>& a) {
    return affine(sum(a), T(1) / static_cast<T>(a.size()));
}

template <typename T>
Var<T> reshape(const Var<T>& a, std::size_t rows, std::size_t cols) {
    detail::require(rows * cols == a.size(), "reshape: element count changes");
    auto& tape = a.tape();
    auto values = a.values();
    auto y = tape.op(rows, cols, std::vector<T>(values.begin(), values.end()), {a});
    tape.set_backward(y, [a, y] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        auto& g = t.grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i];
    });
    return y;
}

/// Horizontal concatenation of blocks with equal row counts.
template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
    detail::require(!parts.empty(), "concat_cols: no inputs");
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        detail::require(p.rows() == rows, "concat_cols: row counts differ");
        cols += p.cols();
    }
    auto& tape = parts.front().tape();
    std::vector<T> out(rows * cols);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const auto v = p.values();
        for (std::size_t r = 0; r < rows; ++r)
            std::copy_n(v.begin() + static_cast<long>(r * p.cols()), p.cols(), out.begin() + static_cast<long>(r * cols + offset));
        offset += p.cols();
    }
    auto y = tape.op(rows, cols, std::move(out), parts);
    tape.set_backward(y, [parts, y, rows, cols] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        std::size_t off = 0;
        for (const auto& p : parts) {
            if (t.needs_grad(p)) {
                auto& g = t.grad_of(p);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < p.cols(); ++c) g[r * p.cols() + c] += dy[r * cols + off + c];
            }
            off += p.cols();
        }
    });
    return y;
}

/// Rows [begin, begin + count) of a.
template <typename T>
Var<T> slice_rows(const Var<T>& a, std::size_t begin, std::size_t count) {
    detail::require(begin + count <= a.rows(), "slice_rows: range out of bounds");
    const std::size_t cols = a.cols();
    auto& tape = a.tape();
    const auto v = a.values().subspan(begin * cols, count * cols);
    auto y = tape.op(count, cols, std::vector<T>(v.begin(), v.end()), {a});
    tape.set_backward(y, [a, y, begin, cols] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        auto& g = t.grad_of(a);
        for (std::size_t i = 0; i < dy.size(); ++i) g[begin * cols + i] += dy[i];
    });
    return y;
}

/// Row i of the result is row index[i] of a; the backward pass scatter-adds.
template <typename T>
Var<T> gather_rows(const Var<T>& a, std::vector<std::size_t> index) {
    const std::size_t cols = a.cols();
    for (auto i : index) detail::require(i < a.rows(), "gather_rows: index out of range");
    auto& tape = a.tape();
    std::vector<T> out(index.size() * cols);
    const auto v = a.values();
    for (std::size_t r = 0; r < index.size(); ++r)
        std::copy_n(v.begin() + static_cast<long>(index[r] * cols), cols, out.begin() + static_cast<long>(r * cols));
    auto y = tape.op(index.size(), cols, std::move(out), {a});
    tape.set_backward(y, [a, y, index = std::move(index), cols] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        auto& g = t.grad_of(a);
        for (std::size_t r = 0; r < index.size(); ++r)
            for (std::size_t c = 0; c < cols; ++c) g[index[r] * cols + c] += dy[r * cols + c];
    });
    return y;
}

/// Column-wise max over each row segment [offsets[s], offsets[s+1]). The
/// scan runs in ascending row order and keeps the first maximum, so the
/// result does not depend on row order.
template <typename T>
Var<T> segment_max(const Var<T>& a, const std::vector<std::size_t>& offsets) {
    detail::require(offsets.size() >= 2 && offsets.back() == a.rows(), "segment_max: offsets do not cover the rows");
    const std::size_t segs = offsets.size() - 1;
    const std::size_t cols = a.cols();
    auto& tape = a.tape();
    std::vector<T> out(segs * cols);
    std::vector<std::size_t> arg(segs * cols);
    const auto v = a.values();
    for (std::size_t s = 0; s < segs; ++s) {
        if (offsets[s + 1] <= offsets[s]) throw EmptyPartError("segment_max: empty segment");
        for (std::size_t c = 0; c < cols; ++c) {
            std::size_t best = offsets[s];
            for (std::size_t r = offsets[s] + 1; r < offsets[s + 1]; ++r) {
                if (v[r * cols + c] > v[best * cols + c]) best = r;
            }
            out[s * cols + c] = v[best * cols + c];
            arg[s * cols + c] = best;
        }
    }
    auto y = tape.op(segs, cols, std::move(out), {a});
    tape.set_backward(y, [a, y, arg = std::move(arg), cols] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        auto& g = t.grad_of(a);
        for (std::size_t k = 0; k < arg.size(); ++k) g[arg[k] * cols + k % cols] += dy[k];
    });
    return y;
}

/// Row v of the result is the mean of rows neighbors[v]; zero when empty.
template <typename T>
Var<T> mean_neighbors(const Var<T>& a, const std::vector<std::vector<std::size_t>>& neighbors) {
    detail::require(neighbors.size() == a.rows(), "mean_neighbors: adjacency size != rows");
    const std::size_t cols = a.cols();
    auto& tape = a.tape();
    std::vector<T> out(a.size(), T(0));
    const auto v = a.values();
    for (std::size_t r = 0; r < neighbors.size(); ++r) {
        if (neighbors[r].empty()) continue;
        const T inv = T(1) / static_cast<T>(neighbors[r].size());
        for (auto u : neighbors[r]) {
            detail::require(u < a.rows(), "mean_neighbors: neighbor out of range");
            for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += v[u * cols + c];
        }
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= inv;
    }
    auto y = tape.op(a.rows(), cols, std::move(out), {a});
    tape.set_backward(y, [a, y, neighbors, cols] {
        auto& t = y.tape();
        const auto& dy = *t.upstream(y);
        auto& g = t.grad_of(a);
        for (std::size_t r = 0; r < neighbors.size(); ++r) {
            if (neighbors[r].empty()) continue;
            const T inv = T(1) / static_cast<T>(neighbors[r].size());
            for (auto u : neighbors[r])
                for (std::size_t c = 0; c < cols; ++c) g[u * cols + c] += inv * dy[r * cols + c];
        }
    });
    return y;
}

/// Probabilities entering a log are clamped to [kProbEps, 1 - kProbEps].
inline constexpr double kProbEps = 1e-6;

template <typename T>
T clamp_prob(T p) {
    return std::clamp(p, static_cast<T>(kProbEps), static_cast<T>(1.0 - kProbEps));
}

/// Softmax of each row, max-subtracted.
template <typename T>
std::vector<T> softmax_rows(std::span<const T> logits, std::size_t rows, std::size_t cols) {
    std::vector<T> out(logits.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const T* in = logits.data() + r * cols;
        T* o = out.data() + r * cols;
        const T m = *std::max_element(in, in + cols);
        T z = T(0);
        for (std::size_t c = 0; c < cols; ++c) z += (o[c] = std::exp(in[c] - m));
        for (std::size_t c = 0; c < cols; ++c) o[c] /= z;
    }
    return out;
}

/// Mean over rows of -log softmax(row)[target]. The log sees the clamped
/// probability; the gradient is the usual softmax - onehot.
template <typename T>
Var<T> cross_entropy(const Var<T>& logits, const std::vector<std::size_t>& targets) {
    detail::require(targets.size() == logits.rows(), "cross_entropy: one target per row");
    detail::require(logits.rows() > 0, "cross_entropy: no rows");
    const std::size_t k = logits.cols();
    for (auto t : targets)
        if (t >= k) throw IndexError("cross_entropy: target out of range");
    auto probs = softmax_rows(logits.values(), logits.rows(), k);
    T loss = T(0);
    for (std::size_t r = 0; r < targets.size(); ++r) loss -= std::log(clamp_prob(probs[r * k + targets[r]]));
    const T inv = T(1) / static_cast<T>(targets.size());
    auto& tape = logits.tape();
    auto y = tape.op(1, 1, {loss * inv}, {logits});
    tape.set_backward(y, [logits, y, probs = std::move(probs), targets, k, inv] {
        auto& t = y.tape();
        const T dy = (*t.upstream(y))[0] * inv;
        auto& g = t.grad_of(logits);
        for (std::size_t r = 0; r < targets.size(); ++r)
            for (std::size_t c = 0; c < k; ++c)
                g[r * k + c] += dy * (probs[r * k + c] - (c == targets[r] ? T(1) : T(0)));
    });
    return y;
}

/// Mean binary cross-entropy of sigmoid(logit) against targets in [0,1];
/// zero (and gradient-free) when there are no rows.
template <typename T>
Var<T> bce_with_logits(const Var<T>& logits, const std::vector<T>& targets) {
    detail::require(logits.cols() == 1 || logits.rows() == 0, "bce_with_logits: logits must be a column");
    detail::require(targets.size() == logits.rows(), "bce_with_logits: one target per row");
    auto& tape = logits.tape();
    if (targets.empty()) return tape.constant(1, 1, {T(0)});
    const auto z = logits.values();
    std::vector<T> probs(targets.size());
    T loss = T(0);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        probs[i] = stable_sigmoid(z[i]);
        const T p = clamp_prob(probs[i]);
        loss -= targets[i] * std::log(p) + (T(1) - targets[i]) * std::log(T(1) - p);
    }
    const T inv = T(1) / static_cast<T>(targets.size());
    auto y = tape.op(1, 1, {loss * inv}, {logits});
    tape.set_backward(y, [logits, y, probs = std::move(probs), targets, inv] {
        auto& t = y.tape();
        const T dy = (*t.upstream(y))[0] * inv;
        auto& g = t.grad_of(logits);
        for (std::size_t i = 0; i < targets.size(); ++i) g[i] += dy * (probs[i] - targets[i]);
    });
    return y;
}

/// Softmax over each segment of a logit column, then mean over segments of
/// -log p[target]; targets are row indices local to their segment.
template <typename T>
Var<T> segment_softmax_cross_entropy(const Var<T>& logits, const std::vector<std::size_t>& offsets,
                                     const std::vector<std::size_t>& targets) {
    detail::require(logits.cols() == 1, "segment_softmax_cross_entropy: logits must be a column");
    detail::require(offsets.size() == targets.size() + 1 && offsets.back() == logits.rows(),
                    "segment_softmax_cross_entropy: offsets do not cover the rows");
    detail::require(!targets.empty(), "segment_softmax_cross_entropy: no segments");
    const auto z = logits.values();
    std::vector<T> probs(z.size());
    T loss = T(0);
    for (std::size_t s = 0; s < targets.size(); ++s) {
        const std::size_t b = offsets[s];
        const std::size_t n = offsets[s + 1] - b;
        if (n == 0) throw EmptyPartError("segment_softmax_cross_entropy: empty segment");
        if (targets[s] >= n) throw IndexError("segment_softmax_cross_entropy: target out of range");
        auto p = softmax_rows<T>(z.subspan(b, n), 1, n);
        std::copy(p.begin(), p.end(), probs.begin() + static_cast<long>(b));
        loss -= std::log(clamp_prob(p[targets[s]]));
    }
    const T inv = T(1) / static_cast<T>(targets.size());
    auto& tape = logits.tape();
    auto y = tape.op(1, 1, {loss * inv}, {logits});
    tape.set_backward(y, [logits, y, probs = std::move(probs), offsets, targets, inv] {
        auto& t = y.tape();
        const T dy = (*t.upstream(y))[0] * inv;
        auto& g = t.grad_of(logits);
        for (std::size_t s = 0; s < targets.size(); ++s)
            for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r)
                g[r] += dy * (probs[r] - (r - offsets[s] == targets[s] ? T(1) : T(0)));
    });
    return y;
}

namespace detail {

/// For each row of a, index of the nearest row of b (lowest index on ties)
/// and the squared distance, summed as (dx^2 + dy^2) + dz^2.
template <typename T>
void nearest_rows(std::span<const T> a, std::size_t n, std::span<const T> b, std::size_t m,
                  std::vector<std::size_t>& idx, std::vector<T>& dist) {
    idx.assign(n, 0);
    dist.assign(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
        const T* p = a.data() + 3 * i;
        T best = std::numeric_limits<T>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const T* q = b.data() + 3 * j;
            const T dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
            const T d = (dx * dx + dy * dy) + dz * dz;
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        idx[i] = arg;
        dist[i] = best;
    }
}

} // namespace detail

/// Symmetric squared Chamfer distance between point sets (rows are xyz).
template <typename T>
Var<T> chamfer(const Var<T>& a, const Var<T>& b) {
    if (a.rows() == 0 || b.rows() == 0) throw PreconditionError("chamfer: empty point set");
    detail::require(a.cols() == 3 && b.cols() == 3, "chamfer: points must have 3 columns");
    const std::size_t n = a.rows();
    const std::size_t m = b.rows();
    std::vector<std::size_t> ab, ba;
    std::vector<T> dab, dba;
    detail::nearest_rows(a.values(), n, b.values(), m, ab, dab);
    detail::nearest_rows(b.values(), m, a.values(), n, ba, dba);
    T sa = T(0), sb = T(0);
    for (T d : dab) sa += d;
    for (T d : dba) sb += d;
    auto& tape = a.tape();
    auto y = tape.op(1, 1, {sa / static_cast<T>(n) + sb / static_cast<T>(m)}, {a, b});
    tape.set_backward(y, [a, b, y, ab = std::move(ab), ba = std::move(ba), n, m] {
        auto& t = y.tape();
        const T dy = (*t.upstream(y))[0];
        const auto av = a.values();
        const auto bv = b.values();
        const bool ga = t.needs_grad(a);
        const bool gb = t.needs_grad(b);
        std::vector<T>* g_a = ga ? &t.grad_of(a) : nullptr;
        std::vector<T>* g_b = gb ? &t.grad_of(b) : nullptr;
        const T wa = T(2) * dy / static_cast<T>(n);
        const T wb = T(2) * dy / static_cast<T>(m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < 3; ++c) {
                const T d = av[3 * i + c] - bv[3 * ab[i] + c];
                if (ga) (*g_a)[3 * i + c] += wa * d;
                if (gb) (*g_b)[3 * ab[i] + c] -= wa * d;
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t c = 0; c < 3; ++c) {
                const T d = bv[3 * j + c] - av[3 * ba[j] + c];
                if (gb) (*g_b)[3 * j + c] += wb * d;
                if (ga) (*g_a)[3 * ba[j] + c] -= wb * d;
            }
        }
    });
    return y;
}

} // namespace kinehier::neural
