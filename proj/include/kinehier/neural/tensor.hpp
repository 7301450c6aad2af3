#pragma once

#include "kinehier/errors.hpp"

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

namespace kinehier::neural {

/// Dense row-major array with an optional gradient slot.
template <typename T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;
    std::vector<T> grad;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, T fill = T(0))
        : shape(std::move(dims)), data(element_count(shape), fill) {}

    static std::size_t element_count(const std::vector<std::size_t>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    /// Matrix view: rank 2 is (d0, d1), rank 1 a row vector, rank 0 a 1x1.
    std::size_t rows() const { return shape.size() >= 2 ? shape[0] : 1; }
    std::size_t cols() const {
        if (shape.empty()) return 1;
        return shape.size() == 1 ? shape[0] : size() / shape[0];
    }
};

/// Named, ordered collection of learnable tensors.
template <typename T>
class ParameterSet {
public:
    struct Entry {
        std::string name;
        Tensor<T> tensor;
        bool trainable = true;
    };

    std::size_t add(const std::string& name, std::vector<std::size_t> shape, bool trainable = true) {
        if (index_.contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
        index_[name] = entries_.size();
        entries_.push_back({name, Tensor<T>(std::move(shape)), trainable});
        return entries_.size() - 1;
    }

    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string& name) const { return index_.contains(name); }
    std::size_t index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw IndexError("no parameter named '" + name + "'");
        return it->second;
    }

    Entry& entry(std::size_t i) { return entries_.at(i); }
    const Entry& entry(std::size_t i) const { return entries_.at(i); }
    Tensor<T>& operator[](const std::string& name) { return entries_[index_of(name)].tensor; }
    const Tensor<T>& operator[](const std::string& name) const { return entries_[index_of(name)].tensor; }

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    /// Marks every parameter whose name starts with `prefix`.
    void set_trainable(const std::string& prefix, bool trainable) {
        for (auto& e : entries_) {
            if (e.name.rfind(prefix, 0) == 0) e.trainable = trainable;
        }
    }

    void zero_grad() {
        for (auto& e : entries_) e.tensor.grad.assign(e.tensor.size(), T(0));
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.tensor.size();
        return n;
    }

    /// Same names, shapes and flags with values converted to U.
    template <typename U>
    ParameterSet<U> cast() const {
        ParameterSet<U> out;
        for (const auto& e : entries_) {
            const auto idx = out.add(e.name, e.tensor.shape, e.trainable);
            auto& dst = out.entry(idx).tensor.data;
            for (std::size_t i = 0; i < e.tensor.size(); ++i) dst[i] = static_cast<U>(e.tensor.data[i]);
        }
        return out;
    }

    /// Copies values from `other` for every name present in both sets.
    /// Shapes must agree.
    template <typename U>
    void assign_from(const ParameterSet<U>& other) {
        for (const auto& e : other) {
            if (!contains(e.name)) continue;
            auto& dst = (*this)[e.name];
            if (dst.shape != e.tensor.shape) throw ShapeError("shape mismatch for parameter '" + e.name + "'");
            for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] = static_cast<T>(e.tensor.data[i]);
        }
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace kinehier::neural
