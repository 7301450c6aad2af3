#pragma once

#include "kinehier/errors.hpp"
#include "kinehier/neural/tensor.hpp"

#include <cmath>
#include <vector>

namespace kinehier::neural {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Non-trainable entries are left alone.
template <typename T>
class Adam {
public:
    explicit Adam(AdamOptions options = {}) : opt_(options) {}

    void step(ParameterSet<T>& params) {
        if (m_.empty()) {
            for (const auto& e : params) {
                m_.emplace_back(e.tensor.size(), 0.0);
                v_.emplace_back(e.tensor.size(), 0.0);
            }
        }
        if (m_.size() != params.size()) throw ShapeError("optimizer state does not match the parameter set");
        ++t_;
        const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
        std::size_t k = 0;
        for (auto& e : params) {
            auto& m = m_[k];
            auto& v = v_[k++];
            if (!e.trainable || e.tensor.grad.empty()) continue;
            if (m.size() != e.tensor.size()) throw ShapeError("optimizer state does not match the parameter set");
            for (std::size_t i = 0; i < m.size(); ++i) {
                const double g = static_cast<double>(e.tensor.grad[i]);
                m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g;
                v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g * g;
                const double update = opt_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + opt_.eps);
                e.tensor.data[i] = static_cast<T>(static_cast<double>(e.tensor.data[i]) - update);
            }
        }
    }

    long steps() const { return t_; }

private:
    AdamOptions opt_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

/// v <- mu v + g;  p <- p - lr (g + mu v).
template <typename T>
class NesterovSgd {
public:
    NesterovSgd(double lr, double momentum = 0.9) : lr_(lr), mu_(momentum) {}

    void step(ParameterSet<T>& params) {
        if (vel_.empty()) {
            for (const auto& e : params) vel_.emplace_back(e.tensor.size(), 0.0);
        }
        if (vel_.size() != params.size()) throw ShapeError("optimizer state does not match the parameter set");
        std::size_t k = 0;
        for (auto& e : params) {
            auto& vel = vel_[k++];
            if (!e.trainable || e.tensor.grad.empty()) continue;
            for (std::size_t i = 0; i < vel.size(); ++i) {
                const double g = static_cast<double>(e.tensor.grad[i]);
                vel[i] = mu_ * vel[i] + g;
                e.tensor.data[i] = static_cast<T>(static_cast<double>(e.tensor.data[i]) - lr_ * (g + mu_ * vel[i]));
            }
        }
    }

private:
    double lr_;
    double mu_;
    std::vector<std::vector<double>> vel_;
};

} // namespace kinehier::neural
