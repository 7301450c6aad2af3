#include "kinehier/labelnet/labeled_graph.hpp"
#include "kinehier/labelnet/model.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/random.hpp"

#include <cmath>

namespace kinehier::labelnet {

ParameterSet<float> make_model(const ModelConfig& config) {
    check_config(config);
    ParameterSet<float> p;
    register_model(p, config);
    Rng rng(derive_seed({config.seed, 0x696e6974}));
    init_model(p, config, rng);
    return p;
}

void check_labeled_graph(const LabeledGraph& g) {
    const std::size_t n = g.base.nodes.size();
    const std::size_t m = g.base.edges.size();
    auto fail = [](const std::string& what) { throw ValidationError("labeled graph: " + what); };
    if (g.motion.size() != n || g.root.size() != n) fail("node outputs do not match the node count");
    if (g.exist.size() != m || g.direction.size() != m) fail("edge outputs do not match the edge count");
    auto prob = [&](double p) {
        if (!(p >= 0.0 && p <= 1.0)) fail("probability outside [0, 1]");
    };
    for (const auto& dist : g.motion) {
        double s = 0;
        for (double p : dist) {
            prob(p);
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-5) fail("motion distribution does not sum to 1");
    }
    double root_sum = 0;
    for (double p : g.root) {
        prob(p);
        root_sum += p;
    }
    if (n > 0 && std::abs(root_sum - 1.0) > 1e-5) fail("root scores do not sum to 1");
    for (double p : g.exist) prob(p);
    for (double p : g.direction) prob(p);
}

double prediction_loss(const LabeledGraph& g, const GraphTargets& t, const LossWeights& w) {
    auto nll = [](double p) { return -std::log(neural::clamp_prob(p)); };
    double total = 0;
    if (!g.motion.empty()) {
        double s = 0;
        for (std::size_t i = 0; i < g.motion.size(); ++i) s += nll(g.motion[i].at(t.motion.at(i)));
        total += w.motion * s / static_cast<double>(g.motion.size());
    }
    total += w.root * nll(g.root.at(t.root));
    if (!g.exist.empty()) {
        double s = 0;
        for (std::size_t e = 0; e < g.exist.size(); ++e)
            s += t.exist.at(e) > 0.5f ? nll(g.exist[e]) : nll(1.0 - g.exist[e]);
        total += w.exist * s / static_cast<double>(g.exist.size());
    }
    if (!t.dir_edges.empty()) {
        double s = 0;
        for (std::size_t k = 0; k < t.dir_edges.size(); ++k) {
            const double p = g.direction.at(t.dir_edges[k]);
            s += t.direction[k] > 0.5f ? nll(p) : nll(1.0 - p);
        }
        total += w.direction * s / static_cast<double>(t.dir_edges.size());
    }
    return total;
}

std::vector<LabeledGraph> predict(const std::vector<const GraphSample*>& samples, const ParameterSet<float>& params,
                                  const ModelConfig& config) {
    Tape<float> tape;
    const auto batch = assemble_batch<float>(samples, config.samples_per_part);
    const auto out = forward(tape, params, config, batch);
    const auto motion = out.motion.values();
    const auto root = out.root.values();
    const auto exist = out.exist.values();
    const auto dir = out.direction.values();

    std::vector<LabeledGraph> result;
    std::size_t node = 0, edge = 0;
    for (const auto* s : samples) {
        LabeledGraph g;
        g.base = s->graph;
        g.part_ids = s->part_ids;
        const std::size_t n = s->part_count();
        double zmax = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) zmax = std::max(zmax, static_cast<double>(root[node + i]));
        double zsum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::array<double, kMotionTypeCount> logits{};
            double m = -INFINITY;
            for (int k = 0; k < kMotionTypeCount; ++k) m = std::max(m, logits[k] = motion[(node + i) * kMotionTypeCount + k]);
            double z = 0;
            for (auto& l : logits) z += (l = std::exp(l - m));
            for (auto& l : logits) l /= z;
            g.motion.push_back(logits);
            g.root.push_back(std::exp(static_cast<double>(root[node + i]) - zmax));
            zsum += g.root.back();
        }
        for (auto& r : g.root) r /= zsum;
        for (std::size_t e = 0; e < s->graph.edges.size(); ++e) {
            g.exist.push_back(neural::stable_sigmoid(static_cast<double>(exist[edge + e])));
            g.direction.push_back(neural::stable_sigmoid(static_cast<double>(dir[edge + e])));
        }
        node += n;
        edge += s->graph.edges.size();
        result.push_back(std::move(g));
    }
    return result;
}

LabeledGraph predict(const GraphSample& sample, const ParameterSet<float>& params, const ModelConfig& config) {
    return predict(std::vector<const GraphSample*>{&sample}, params, config).front();
}

LabeledGraph oracle_labels(const GraphSample& sample) {
    if (!sample.targets) throw PreconditionError("oracle labels need a sample with targets");
    const auto& t = *sample.targets;
    const double hi = 1.0 - neural::kProbEps, lo = neural::kProbEps;
    LabeledGraph g;
    g.base = sample.graph;
    g.part_ids = sample.part_ids;
    const std::size_t n = sample.part_count();
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, kMotionTypeCount> dist{};
        dist.fill(lo);
        dist[t.motion[i]] = 1.0 - (kMotionTypeCount - 1) * lo;
        g.motion.push_back(dist);
        g.root.push_back(i == t.root ? 1.0 - static_cast<double>(n - 1) * lo : lo);
    }
    for (float e : t.exist) g.exist.push_back(e > 0.5f ? hi : lo);
    g.direction.assign(t.exist.size(), 0.5);
    for (std::size_t k = 0; k < t.dir_edges.size(); ++k) g.direction[t.dir_edges[k]] = t.direction[k] > 0.5f ? hi : lo;
    return g;
}

} // namespace kinehier::labelnet
