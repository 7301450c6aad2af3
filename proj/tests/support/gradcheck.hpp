#pragma once

#include "kinehier/neural/autodiff.hpp"
#include "kinehier/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace kinehier::testing {

using neural::ParameterSet;
using neural::Tape;
using neural::Var;

/// Builds a scalar loss from `params`. Inputs that should be checked are
/// registered as trainable parameters alongside the weights.
using LossBuilder = std::function<Var<double>(Tape<double>&, const ParameterSet<double>&)>;

struct GradCheck {
    double rel_error = 0.0;      // ||analytic - numeric|| / max(||analytic||, ||numeric||)
    bool smooth = true;          // false when the step straddles a kink
    std::size_t coordinates = 0;
};

inline double evaluate(const LossBuilder& build, const ParameterSet<double>& params) {
    Tape<double> tape;
    return build(tape, params).value();
}

inline std::vector<double> analytic_gradient(const LossBuilder& build, ParameterSet<double>& params) {
    params.zero_grad();
    Tape<double> tape;
    tape.backward(build(tape, params));
    tape.accumulate_parameter_grads(params);
    std::vector<double> g;
    for (const auto& e : params)
        if (e.trainable) g.insert(g.end(), e.tensor.grad.begin(), e.tensor.grad.end());
    return g;
}

inline std::vector<double> central_difference(const LossBuilder& build, ParameterSet<double>& params, double h) {
    std::vector<double> g;
    for (auto& e : params) {
        if (!e.trainable) continue;
        for (auto& x : e.tensor.data) {
            const double keep = x;
            x = keep + h;
            const double up = evaluate(build, params);
            x = keep - h;
            const double down = evaluate(build, params);
            x = keep;
            g.push_back((up - down) / (2 * h));
        }
    }
    return g;
}

/// Central differences at h and h/2 agree to O(h^2) on smooth functions; a
/// ReLU kink or max switch inside the step shows up as a gap between them.
inline GradCheck check_gradient(const LossBuilder& build, ParameterSet<double>& params, double h = 1e-4) {
    const auto a = analytic_gradient(build, params);
    const auto n = central_difference(build, params, h);
    const auto n2 = central_difference(build, params, h / 2);
    GradCheck out;
    out.coordinates = a.size();
    double diff = 0, na = 0, nn = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - n[i]) * (a[i] - n[i]);
        na += a[i] * a[i];
        nn += n[i] * n[i];
        if (std::abs(n[i] - n2[i]) > 1e-6 * std::max(1.0, std::abs(n[i]))) out.smooth = false;
    }
    const double scale = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
    out.rel_error = std::sqrt(diff) / scale;
    return out;
}

inline void fill_uniform(std::vector<double>& v, Rng& rng, double lo = -1.0, double hi = 1.0) {
    for (auto& x : v) x = uniform(rng, lo, hi);
}

/// sum(out .* r) for a fixed random r, turning any output into a scalar.
inline Var<double> random_projection(Tape<double>& tape, const Var<double>& out, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> r(out.size());
    fill_uniform(r, rng);
    return neural::sum(neural::mul(out, tape.constant(out.rows(), out.cols(), std::move(r))));
}

struct TrialSummary {
    double max_rel_error = 0.0;
    int trials = 0;
    int resampled = 0;
};

/// Runs `trials` smooth trials; `make(trial_seed)` returns a parameter set and
/// builder. Non-smooth draws are redrawn, up to `trials` extra draws.
template <typename Make>
TrialSummary run_trials(int trials, std::uint64_t seed, Make make, double h = 1e-4) {
    TrialSummary s;
    for (std::uint64_t draw = 0; s.trials < trials && s.resampled <= trials; ++draw) {
        auto [params, build] = make(derive_seed({seed, draw}));
        const auto r = check_gradient(build, params, h);
        if (!r.smooth) {
            ++s.resampled;
            continue;
        }
        ++s.trials;
        s.max_rel_error = std::max(s.max_rel_error, r.rel_error);
    }
    return s;
}

} // namespace kinehier::testing
