#include "kinehier/errors.hpp"
#include "kinehier/graphbuild/part_graph.hpp"
#include "kinehier/labelnet/config.hpp"
#include "kinehier/labelnet/labeled_graph.hpp"
#include "kinehier/labelnet/model.hpp"
#include "kinehier/labelnet/sample.hpp"
#include "kinehier/labelnet/training.hpp"
#include "kinehier/neural/checkpoint.hpp"
#include "kinehier/synthgen/dataset.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace kinehier;
using namespace kinehier::labelnet;

namespace {

ModelConfig small_config() {
    ModelConfig c;
    c.encoder_widths = {16, 32};
    c.stage_width = 16;
    c.stages = 2;
    c.samples_per_part = 32;
    c.head_width = 16;
    c.decoder_width = 32;
    c.decoder_points = 32;
    c.pretrain_parts = 64;
    c.pretrain_epochs = 3;
    c.train_epochs = 3;
    c.pretrain_lr = 1e-2;
    return c;
}

std::vector<synthgen::DatasetRecord> records(int objects, int poses, std::uint64_t first = 0,
                                             Category cat = Category::Cabinet) {
    synthgen::DatasetManifest m;
    m.category = cat;
    m.train = {objects, first};
    m.test = {0, first + 1'000'000};
    m.poses_per_object = poses;
    m.conditions = {synthgen::Condition::Clean};
    m.scan.n_points = 1024;
    return synthgen::generate_records(m, synthgen::Split::Train, synthgen::Condition::Clean);
}

std::vector<GraphSample> samples(const ModelConfig& c, int objects, int poses, std::uint64_t first = 0) {
    return prepare_samples(records(objects, poses, first), c);
}

PointCloud two_part_cloud() {
    PointCloud c;
    c.labels.emplace();
    for (int i = 0; i < 20; ++i) {
        c.points.emplace_back(0.05 * i, 0, 0);
        c.labels->push_back(0);
        c.points.emplace_back(0.05 * i, 0.02, 0.3);
        c.labels->push_back(1);
    }
    return c;
}

} // namespace

TEST(Config, JsonRoundTripAndErrors) {
    auto c = small_config();
    c.seed = 77;
    c.weights.exist = 0.25;
    const auto j = config_to_json(c);
    EXPECT_EQ(config_to_json(config_from_json(j)), j);
    auto unknown = j;
    unknown["learning_rate"] = 1;
    EXPECT_THROW(config_from_json(unknown), ConfigError);
    auto version = j;
    version["format_version"] = kConfigFormatVersion + 1;
    EXPECT_THROW(config_from_json(version), VersionMismatchError);
    auto bad = c;
    bad.stages = 0;
    EXPECT_THROW(check_config(bad), ConfigError);
    bad = c;
    bad.weights.root = -1;
    EXPECT_THROW(check_config(bad), ConfigError);
}

TEST(Config, DefaultDimensions) {
    const ModelConfig c;
    EXPECT_EQ(c.node_input_dim(), 134u);
    EXPECT_EQ(c.feature_dim(), 768u);
}

TEST(Input, SinglePointPartIsReplicated) {
    ModelConfig c = small_config();
    PointCloud cloud;
    cloud.points = {Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(1, 0.9, 1)};
    cloud.labels = std::vector<int>{0, 1, 1};
    const auto s = prepare_input(cloud, graphbuild::build_graph(cloud), c, 1);
    for (std::size_t k = 0; k < c.samples_per_part; ++k)
        for (int d = 0; d < 3; ++d) EXPECT_EQ(s.points[k * 3 + d], s.points[static_cast<std::size_t>(d)]);
    EXPECT_EQ(s.descriptors[3], 0.0f);  // zero extent
    const auto params = make_model(c);
    const auto g = predict(s, params, c);
    EXPECT_NO_THROW(check_labeled_graph(g));
}

TEST(Input, TranslationInvariant) {
    const ModelConfig c = small_config();
    auto cloud = two_part_cloud();
    const auto a = prepare_input(cloud, graphbuild::build_graph(cloud), c, 3);
    for (auto& p : cloud.points) p += Vec3(10, -4, 2.5);
    const auto b = prepare_input(cloud, graphbuild::build_graph(cloud), c, 3);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_NEAR(a.points[i], b.points[i], 1e-6);
    for (std::size_t i = 0; i < a.descriptors.size(); ++i) EXPECT_NEAR(a.descriptors[i], b.descriptors[i], 1e-6);
}

TEST(Model, FeatureWidths) {
    const ModelConfig c;
    const auto params = make_model(c);
    auto cfg = c;
    cfg.samples_per_part = 8;
    const auto s = prepare_input(two_part_cloud(), graphbuild::build_graph(two_part_cloud()), cfg, 0);
    neural::Tape<float> tape;
    const auto batch = assemble_batch<float>({&s}, cfg.samples_per_part);
    const auto out = forward(tape, params, cfg, batch);
    EXPECT_EQ(out.node_features.cols(), 134u);
    EXPECT_EQ(out.y.cols(), 768u);
    EXPECT_EQ(out.motion.cols(), 4u);
    EXPECT_EQ(out.exist.rows(), 1u);
}

TEST(Model, SingleNodeGraph) {
    const ModelConfig c = small_config();
    PointCloud cloud;
    cloud.points = {Vec3(0, 0, 0), Vec3(0.1, 0, 0)};
    cloud.labels = std::vector<int>{0, 0};
    const auto s = prepare_input(cloud, graphbuild::build_graph(cloud), c, 0);
    const auto g = predict(s, make_model(c), c);
    ASSERT_EQ(g.root.size(), 1u);
    EXPECT_NEAR(g.root[0], 1.0, 1e-6);
    EXPECT_TRUE(g.exist.empty());
    EXPECT_NO_THROW(check_labeled_graph(g));
}

TEST(Model, PermutationEquivariant) {
    const ModelConfig c = small_config();
    const auto base = samples(c, 1, 1, 5)[0];
    const std::size_t n = base.part_count();
    ASSERT_GE(n, 3u);
    std::vector<std::size_t> perm(n);  // old -> new
    for (std::size_t i = 0; i < n; ++i) perm[i] = n - 1 - i;
    GraphSample s;
    s.points.resize(base.points.size());
    s.descriptors.resize(base.descriptors.size());
    s.graph.nodes.resize(n);
    const std::size_t k = c.samples_per_part * 3;
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(base.points.begin() + static_cast<long>(i * k), k, s.points.begin() + static_cast<long>(perm[i] * k));
        std::copy_n(base.descriptors.begin() + static_cast<long>(i * 6), 6,
                    s.descriptors.begin() + static_cast<long>(perm[i] * 6));
        s.graph.nodes[perm[i]].part_id = static_cast<int>(perm[i]);
    }
    for (const auto& e : base.graph.edges) {
        const int u = static_cast<int>(perm[static_cast<std::size_t>(e.u)]);
        const int v = static_cast<int>(perm[static_cast<std::size_t>(e.v)]);
        s.graph.edges.push_back({std::min(u, v), std::max(u, v), e.repaired});
    }
    std::sort(s.graph.edges.begin(), s.graph.edges.end(),
              [](const auto& a, const auto& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
    s.part_ids = base.part_ids;

    const auto params = make_model(c);
    const auto a = predict(base, params, c);
    const auto b = predict(s, params, c);
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(a.root[i], b.root[perm[i]], 1e-5);
        for (int m = 0; m < kMotionTypeCount; ++m) EXPECT_NEAR(a.motion[i][m], b.motion[perm[i]][m], 1e-5);
    }
    for (std::size_t e = 0; e < base.graph.edges.size(); ++e) {
        const auto& old = base.graph.edges[e];
        const int u = static_cast<int>(perm[static_cast<std::size_t>(old.u)]);
        const int v = static_cast<int>(perm[static_cast<std::size_t>(old.v)]);
        const auto idx = *s.graph.edge_index(u, v);
        EXPECT_NEAR(a.exist[e], b.exist[idx], 1e-5);
        // direction is stated for the canonical order; reversing flips it
        EXPECT_NEAR(a.direction[e], u < v ? b.direction[idx] : 1.0 - b.direction[idx], 1e-5);
    }
}

TEST(Model, LabeledGraphInvariants) {
    auto c = small_config();
    const auto data = samples(c, 10, 10, 20);
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        c.seed = trial;
        const auto params = make_model(c);
        const auto g = predict(data[trial % data.size()], params, c);
        ASSERT_NO_THROW(check_labeled_graph(g));
        double root = 0;
        for (double r : g.root) root += r;
        EXPECT_NEAR(root, 1.0, 1e-5);
    }
}

TEST(Model, UntrainedMotionNearUniform) {
    ModelConfig c;
    c.samples_per_part = 32;
    const auto data = samples(c, 1, 1, 9);
    double total = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        c.seed = trial;
        LossWeights only_motion{1, 0, 0, 0};
        const auto g = predict(data[0], make_model(c), c);
        total += prediction_loss(g, *data[0].targets, only_motion);
    }
    EXPECT_NEAR(total / 100, std::log(4.0), 0.05);
}

TEST(Model, CheckLabeledGraphRejects) {
    LabeledGraph g;
    g.base.nodes.resize(2);
    g.base.nodes[1].part_id = 1;
    g.base.edges = {{0, 1, false}};
    g.part_ids = {0, 1};
    g.motion = {{0.25, 0.25, 0.25, 0.25}, {1, 0, 0, 0}};
    g.root = {0.5, 0.5};
    g.exist = {0.3};
    g.direction = {0.9};
    EXPECT_NO_THROW(check_labeled_graph(g));
    auto bad = g;
    bad.root = {0.6, 0.6};
    EXPECT_THROW(check_labeled_graph(bad), ValidationError);
    bad = g;
    bad.exist = {1.2};
    EXPECT_THROW(check_labeled_graph(bad), ValidationError);
    bad = g;
    bad.direction.clear();
    EXPECT_THROW(check_labeled_graph(bad), ValidationError);
}

TEST(Loss, HandComputedThreeNodeGraph) {
    LabeledGraph g;
    g.base.nodes.resize(3);
    for (int i = 0; i < 3; ++i) g.base.nodes[static_cast<std::size_t>(i)].part_id = i;
    g.base.edges = {{0, 1, false}, {1, 2, false}};
    g.part_ids = {0, 1, 2};
    g.motion = {{0.7, 0.1, 0.1, 0.1}, {0.25, 0.25, 0.25, 0.25}, {0.1, 0.1, 0.6, 0.2}};
    g.root = {0.5, 0.3, 0.2};
    g.exist = {0.9, 0.2};
    g.direction = {0.8, 0.5};
    GraphTargets t;
    t.motion = {0, 1, 2};
    t.root = 0;
    t.exist = {1, 0};
    t.dir_edges = {0};
    t.direction = {1};
    const double motion = -(std::log(0.7) + std::log(0.25) + std::log(0.6)) / 3;
    const double root = -std::log(0.5);
    const double exist = -(std::log(0.9) + std::log(0.8)) / 2;
    const double dir = -std::log(0.8);
    EXPECT_NEAR(prediction_loss(g, t, {1, 1, 1, 1}), motion + root + exist + dir, 1e-12);
    EXPECT_NEAR(prediction_loss(g, t, {2, 0, 1, 0}), 2 * motion + exist, 1e-12);
    g.exist = {0.0, 0.2};  // clamped, finite
    EXPECT_NEAR(prediction_loss(g, t, {0, 0, 1, 0}), -(std::log(1e-6) + std::log(0.8)) / 2, 1e-9);
}

TEST(Loss, TapeMatchesPredictionLoss) {
    auto c = small_config();
    const auto data = samples(c, 3, 2, 40);
    const auto params = make_model(c);
    for (const auto& s : data) {
        neural::Tape<float> tape;
        const auto batch = assemble_batch<float>({&s}, c.samples_per_part);
        const auto out = forward(tape, params, c, batch);
        const double on_tape = batch_loss(tape, out, batch, {&*s.targets}, c.weights).value();
        EXPECT_NEAR(on_tape, prediction_loss(predict(s, params, c), *s.targets, c.weights), 1e-4 * on_tape);
    }
}

TEST(Targets, ContractTree) {
    KinematicTree t;
    t.nodes = {{0, MotionType::Static}, {1, MotionType::Translating}, {2, MotionType::Static}, {3, MotionType::Rotating}};
    t.edges = {{0, 1, {}}, {1, 2, {}}, {0, 3, {}}};
    t.edges[0].joint.kind = JointKind::Prismatic;
    const auto a = contract_tree(t, {0, 2, 3});
    EXPECT_EQ(a.root, 0);
    ASSERT_EQ(a.edges.size(), 2u);
    EXPECT_EQ(a.edges[0].parent, 0);
    EXPECT_EQ(a.edges[0].child, 1);  // part 2 hangs on the root
    EXPECT_EQ(a.nodes[1].motion, MotionType::Static);

    const auto b = contract_tree(t, {1, 2, 3});
    EXPECT_EQ(b.root, 0);  // part 1 is the shallowest present part
    ASSERT_EQ(b.edges.size(), 2u);
    EXPECT_EQ(b.edges[1].parent, 0);  // part 3 reattaches to the new root
    EXPECT_EQ(b.edges[1].child, 2);
}

TEST(Targets, MakeTargets) {
    graphbuild::PartGraph g;
    g.nodes.resize(3);
    for (int i = 0; i < 3; ++i) g.nodes[static_cast<std::size_t>(i)].part_id = i;
    g.edges = {{0, 1, false}, {0, 2, false}};
    KinematicTree t;
    t.nodes = {{0, MotionType::Static}, {1, MotionType::Rotating}, {2, MotionType::Static}};
    t.root = 1;
    t.edges = {{1, 0, {}}, {1, 2, {}}};
    const auto tg = make_targets(g, t);
    EXPECT_EQ(tg.root, 1u);
    EXPECT_EQ(tg.motion, (std::vector<std::size_t>{0, 1, 0}));
    EXPECT_EQ(tg.exist, (std::vector<float>{1, 0}));
    EXPECT_EQ(tg.dir_edges, (std::vector<std::size_t>{0}));
    EXPECT_EQ(tg.direction, (std::vector<float>{0}));
    EXPECT_EQ(tg.missing_edges, 1u);
}

TEST(Pretrain, LossDecreasesAndIsDeterministic) {
    auto c = small_config();
    c.pretrain_epochs = 40;
    const auto parts = pretrain_parts(samples(c, 8, 2, 60), c);
    ASSERT_EQ(parts.size(), 64u);
    const auto a = pretrain_encoder(parts, c);
    const auto b = pretrain_encoder(parts, c);
    EXPECT_EQ(a.loss_curve, b.loss_curve);
    EXPECT_EQ(neural::serialize_parameters(a.params), neural::serialize_parameters(b.params));
    EXPECT_LT(a.loss_curve.back(), a.loss_curve.front());
    EXPECT_LT(autoencoder_loss(parts, a.params, c), 0.2 * a.initial_loss);
    EXPECT_THROW(pretrain_encoder({}, c), ConfigError);
}

TEST(Train, ZeroWeightTermLeavesHeadUntouched) {
    auto c = small_config();
    c.weights = {1, 0, 0, 0};
    const auto data = samples(c, 2, 2, 70);
    const auto init = make_model(c);
    const auto r = train(data, c, {});
    for (const char* head : {kRootHead, kExistHead, kDirectionHead})
        for (const auto& e : init)
            if (e.name.rfind(head, 0) == 0) EXPECT_EQ(r.params[e.name].data, e.tensor.data) << e.name;
    EXPECT_NE(r.params[std::string(kMotionHead) + ".1.w"].data, init[std::string(kMotionHead) + ".1.w"].data);
}

TEST(Train, FreezeEncoderAndDeterminism) {
    auto c = small_config();
    const auto data = samples(c, 2, 2, 80);
    const auto parts = pretrain_parts(data, c);
    const auto pre = pretrain_encoder(parts, c);
    c.freeze_encoder = true;
    const auto frozen = train(data, c, pre.params);
    for (const auto& e : pre.params)
        if (e.name.rfind(kEncoder, 0) == 0 || e.name.rfind(kDecoder, 0) == 0)
            EXPECT_EQ(frozen.params[e.name].data, e.tensor.data) << e.name;
    c.freeze_encoder = false;
    const auto a = train(data, c, pre.params);
    const auto b = train(data, c, pre.params);
    EXPECT_EQ(neural::serialize_parameters(a.params), neural::serialize_parameters(b.params));
    EXPECT_EQ(a.loss_curve, b.loss_curve);
    EXPECT_NE(a.params[std::string(kEncoder) + ".0.w"].data, pre.params[std::string(kEncoder) + ".0.w"].data);
    for (const auto& e : pre.params)
        if (e.name.rfind(kDecoder, 0) == 0) EXPECT_EQ(a.params[e.name].data, e.tensor.data);
}

TEST(Train, OverfitsTinySet) {
    auto c = small_config();
    c.train_epochs = 200;
    c.batch_size = 4;
    const auto data = samples(c, 1, 4, 90);
    const auto before = evaluate_loss(data, make_model(c), c);
    const auto r = train(data, c, {});
    EXPECT_LT(evaluate_loss(data, r.params, c), 0.2 * before);
}

TEST(Train, RejectsUnlabeledSamples) {
    const auto c = small_config();
    auto data = samples(c, 1, 1, 3);
    EXPECT_THROW(train({}, c, {}), ConfigError);
    data[0].targets.reset();
    EXPECT_THROW(train(data, c, {}), TrainingDataError);
}

TEST(Checkpoint, SidecarRoundTrip) {
    auto c = small_config();
    c.seed = 12;
    const auto params = make_model(c);
    const auto path = std::filesystem::temp_directory_path() / "kinehier_model_test.ktnn";
    save_checkpoint(path, params, c, {1.0, 0.5}, {2.0});
    const auto ck = load_checkpoint(path);
    EXPECT_EQ(config_to_json(ck.config), config_to_json(c));
    EXPECT_EQ(ck.pretrain_curve, (std::vector<double>{1.0, 0.5}));
    EXPECT_EQ(neural::serialize_parameters(ck.params), neural::serialize_parameters(params));
    EXPECT_TRUE(std::filesystem::exists(sidecar_path(path)));
}
