#include "kinehier/cli/commands.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/graphbuild/clustering.hpp"
#include "kinehier/io/files.hpp"
#include "kinehier/io/svg.hpp"
#include "kinehier/kinecore/tree.hpp"
#include "kinehier/labelnet/labeled_graph.hpp"
#include "kinehier/labelnet/model.hpp"
#include "kinehier/labelnet/training.hpp"
#include "kinehier/metrics/report.hpp"
#include "kinehier/neural/checkpoint.hpp"
#include "kinehier/random.hpp"
#include "kinehier/treeextract/extract.hpp"
#include "kinehier/treeextract/urdf.hpp"

#include <fmt/core.h>

#include <algorithm>

namespace kinehier::cli {

int exit_code_for(const std::exception& error) {
    if (dynamic_cast<const VersionMismatchError*>(&error)) return kVersion;
    if (dynamic_cast<const CorruptDataError*>(&error)) return kCorrupt;
    if (dynamic_cast<const IoError*>(&error)) return kIo;
    if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const SchemaError*>(&error) ||
        dynamic_cast<const PreconditionError*>(&error) || dynamic_cast<const LimitViolationError*>(&error) ||
        dynamic_cast<const ValidationError*>(&error))
        return kConfig;
    return kFailure;
}

namespace {

Json read_config_file(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
    try {
        return read_json_file(path);
    } catch (const CorruptDataError& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
}

labelnet::ModelConfig model_config(const std::optional<fs::path>& path) {
    if (!path) return {};
    return labelnet::config_from_json(read_config_file(*path));
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory", dir.string());
}

/// Record index within the manifest for the i-th loaded record of a split/condition.
std::vector<long> record_indices(const synthgen::DatasetManifest& m, synthgen::Split split, synthgen::Condition condition) {
    std::vector<long> out;
    for (std::size_t i = 0; i < m.records.size(); ++i)
        if (m.records[i].split == split && m.records[i].condition == condition) out.push_back(static_cast<long>(i));
    return out;
}

std::vector<labelnet::GraphSample> load_samples(const fs::path& data, const synthgen::DatasetManifest& m,
                                                synthgen::Split split, synthgen::Condition condition,
                                                const labelnet::ModelConfig& config,
                                                std::vector<synthgen::DatasetRecord>* keep = nullptr) {
    auto records = synthgen::load_records(data, m, split, condition);
    const auto index = record_indices(m, split, condition);
    std::vector<labelnet::GraphSample> samples;
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            samples.push_back(labelnet::prepare_sample(records[i], config));
        } catch (const CorruptDataError& e) {
            throw CorruptDataError(e.what(), index[i]);
        } catch (const SchemaError& e) {
            throw CorruptDataError(e.what(), index[i]);
        }
        if (const auto missing = samples.back().targets->missing_edges; missing > 0)
            fmt::print(stderr, "warning: record {}: {} tree edge(s) not in the candidate graph, skipped\n", index[i],
                       missing);
    }
    if (keep) *keep = std::move(records);
    return samples;
}

void print_curve(const char* what, const std::vector<double>& curve) {
    if (curve.empty()) return;
    fmt::print("{}: epochs {}, first {:.6f}, final {:.6f}\n", what, curve.size(), curve.front(), curve.back());
}

labelnet::PretrainResult run_pretrain(const std::vector<labelnet::GraphSample>& samples,
                                      const labelnet::ModelConfig& config) {
    const auto parts = labelnet::pretrain_parts(samples, config);
    fmt::print("pretraining encoder on {} part point sets, {} epochs\n", parts.size(), config.pretrain_epochs);
    return labelnet::pretrain_encoder(parts, config, [&](int epoch, double loss) {
        if ((epoch + 1) % 10 == 0 || epoch + 1 == config.pretrain_epochs)
            fmt::print("  pretrain epoch {:>4}  chamfer {:.6f}\n", epoch + 1, loss);
    });
}

PointCloud unlabeled_copy(const PointCloud& cloud) {
    PointCloud out;
    out.points = cloud.points;
    return out;
}

Json labeled_graph_json(const labelnet::LabeledGraph& g) {
    Json nodes = Json::array();
    for (std::size_t i = 0; i < g.motion.size(); ++i) {
        nodes.push_back({{"part_id", g.part_ids[i]}, {"motion", g.motion[i]}, {"root", g.root[i]}});
    }
    Json edges = Json::array();
    for (std::size_t e = 0; e < g.base.edges.size(); ++e) {
        edges.push_back({{"u", g.part_ids[static_cast<std::size_t>(g.base.edges[e].u)]},
                         {"v", g.part_ids[static_cast<std::size_t>(g.base.edges[e].v)]},
                         {"exist", g.exist[e]},
                         {"direction_u_to_v", g.direction[e]}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

void write_tree_exports(const fs::path& out, const KinematicTree& tree, const PointCloud* cloud,
                        const std::string& title) {
    ensure_dir(out);
    write_json_file(out / "tree.json", Json{{"format_version", 1}, {"tree", tree}});
    write_text_file(out / "tree.dot", tree_to_dot(tree));
    write_text_file(out / "tree.urdf", treeextract::tree_to_urdf(tree));
    if (cloud) write_text_file(out / "cloud.svg", io::cloud_motion_svg(*cloud, tree, title));
}

bool is_record_header(const Json& j) { return j.is_object() && j.contains("blob") && j.contains("object"); }

} // namespace

PointCloud read_cloud_json(const fs::path& path) {
    const auto j = read_json_file(path);
    PointCloud cloud;
    try {
        for (const auto& p : j.at("points")) cloud.points.push_back(vec3_from_json(p));
        if (j.contains("labels")) cloud.labels = j.at("labels").get<std::vector<int>>();
    } catch (const Json::exception& e) {
        throw CorruptDataError(std::string("cloud file: ") + e.what());
    }
    try {
        check_point_cloud(cloud);
    } catch (const SchemaError& e) {
        throw CorruptDataError(std::string("cloud file: ") + e.what());
    }
    return cloud;
}

void write_cloud_json(const fs::path& path, const PointCloud& cloud) {
    Json pts = Json::array();
    for (const auto& p : cloud.points) pts.push_back(vec3_to_json(p));
    Json j{{"points", pts}};
    if (cloud.labeled()) j["labels"] = *cloud.labels;
    write_json_file(path, j);
}

synthgen::DatasetManifest cmd_gen(const GenOptions& o) {
    auto manifest = synthgen::manifest_from_json(read_config_file(o.config));
    synthgen::check_manifest(manifest);
    const auto built = synthgen::build_dataset(manifest, o.out);
    fmt::print("dataset: {}\n", o.out.string());
    fmt::print("category {}, seed {}, poses per object {}\n", to_string(built.category), built.seed,
               built.poses_per_object);
    for (auto split : {synthgen::Split::Train, synthgen::Split::Test}) {
        const auto& range = split == synthgen::Split::Train ? built.train : built.test;
        for (auto c : built.conditions) {
            const auto n = record_indices(built, split, c).size();
            fmt::print("  {:<5} {:<5} objects {:>5}  records {:>6}\n", to_string(split), to_string(c), range.count, n);
        }
    }
    return built;
}

void cmd_pretrain(const PretrainOptions& o) {
    const auto config = model_config(o.config);
    const auto manifest = synthgen::read_manifest(o.data);
    const auto samples = load_samples(o.data, manifest, synthgen::Split::Train, o.condition, config);
    if (samples.empty()) throw ConfigError("dataset has no training records for condition " + std::string(to_string(o.condition)));
    const auto res = run_pretrain(samples, config);
    fmt::print("initial chamfer {:.6f}\n", res.initial_loss);
    print_curve("pretrain loss", res.loss_curve);
    if (o.out.has_parent_path()) ensure_dir(o.out.parent_path());
    labelnet::save_checkpoint(o.out, res.params, config, res.loss_curve, {});
}

void cmd_train(const TrainOptions& o) {
    auto config = model_config(o.config);
    if (o.freeze_encoder) config.freeze_encoder = true;
    const auto manifest = synthgen::read_manifest(o.data);
    const auto samples = load_samples(o.data, manifest, synthgen::Split::Train, o.condition, config);
    if (samples.empty()) throw ConfigError("dataset has no training records for condition " + std::string(to_string(o.condition)));
    fmt::print("training samples: {}\n", samples.size());

    neural::ParameterSet<float> initial;
    std::vector<double> pretrain_curve;
    if (o.pretrained) {
        initial = neural::parse_parameters(io::read_bytes(*o.pretrained));
        fmt::print("encoder from {}\n", o.pretrained->string());
    } else {
        auto res = run_pretrain(samples, config);
        initial = std::move(res.params);
        pretrain_curve = std::move(res.loss_curve);
    }
    fmt::print("training graph network, {} epochs, batch {}, lr {}\n", config.train_epochs, config.batch_size,
               config.train_lr);
    const auto res = labelnet::train(samples, config, initial, [](int epoch, double loss) {
        fmt::print("  train epoch {:>4}  loss {:.6f}\n", epoch + 1, loss);
    });
    print_curve("pretrain loss", pretrain_curve);
    print_curve("train loss", res.loss_curve);
    if (o.out.has_parent_path()) ensure_dir(o.out.parent_path());
    labelnet::save_checkpoint(o.out, res.params, config, pretrain_curve, res.loss_curve);
    fmt::print("checkpoint: {}\n", o.out.string());
}

void cmd_infer(const InferOptions& o) {
    const auto ck = labelnet::load_checkpoint(o.checkpoint);
    const auto input = read_json_file(o.input);
    std::optional<synthgen::DatasetRecord> record;
    PointCloud cloud;
    double tau_rel = graphbuild::kDefaultTauRel;
    if (is_record_header(input)) {
        record = synthgen::read_record(o.input);
        cloud = record->cloud;
        tau_rel = record->tau_rel;
    } else {
        cloud = read_cloud_json(o.input);
    }
    if (cloud.points.empty()) throw PreconditionError("input cloud has no points");
    if (o.unlabeled) {
        if (!(o.radius > 0)) throw ConfigError("--radius must be positive");
        cloud = graphbuild::segment_clustering(unlabeled_copy(cloud), o.radius);
    } else if (!cloud.labeled()) {
        throw ConfigError("input cloud has no part labels; pass --unlabeled to segment it by clustering");
    } else if (o.use_gt_segmentation && !record) {
        throw ConfigError("--use-gt-segmentation needs a dataset record as input");
    }

    auto [compact, ids] = graphbuild::compact_labels(cloud);
    auto graph = graphbuild::build_graph(compact, tau_rel);
    auto sample = labelnet::prepare_input(compact, graph, ck.config,
                                          derive_seed({ck.config.seed, static_cast<std::uint64_t>(compact.size()), 0x696e66}));
    sample.part_ids = ids;
    const auto labeled = labelnet::predict(sample, ck.params, ck.config);
    auto tree = treeextract::estimate_joint_axes(treeextract::extract_tree(labeled), graph);
    tree = treeextract::relabel_tree(tree, ids);
    if (record && !o.unlabeled) tree = treeextract::attach_limits(tree, record->object.tree);

    write_tree_exports(o.out, tree, &cloud, o.input.filename().string());
    write_json_file(o.out / "labeled_graph.json", labeled_graph_json(labeled));
    fmt::print("parts {}, candidate edges {}, root part_{}\n", tree.nodes.size(), graph.edges.size(), tree.root);
    for (const auto& e : tree.edges) fmt::print("  part_{} -> part_{}  {}\n", e.parent, e.child, to_string(e.joint.kind));
    fmt::print("exports: {}\n", o.out.string());
}

void cmd_eval(const EvalOptions& o) {
    if (!o.oracle && !o.checkpoint) throw ConfigError("eval needs --checkpoint (or --oracle)");
    if (o.clustering && !(o.radius > 0)) throw ConfigError("--radius must be positive");
    std::optional<labelnet::Checkpoint> ck;
    if (!o.oracle) ck = labelnet::load_checkpoint(*o.checkpoint);
    const labelnet::ModelConfig config = ck ? ck->config : labelnet::ModelConfig{};
    const auto manifest = synthgen::read_manifest(o.data);
    const auto conditions = o.conditions.empty() ? manifest.conditions : o.conditions;

    std::vector<metrics::Aggregate> aggregates;
    std::vector<metrics::ObjectRow> all_rows;
    std::size_t total = 0;
    for (auto condition : conditions) {
        std::vector<synthgen::DatasetRecord> records;
        const auto samples = load_samples(o.data, manifest, o.split, condition, config, &records);
        if (samples.empty()) continue;
        total += samples.size();
        std::vector<labelnet::LabeledGraph> labeled;
        for (std::size_t b = 0; b < samples.size(); b += config.batch_size) {
            if (o.oracle) {
                for (std::size_t i = b; i < std::min(samples.size(), b + config.batch_size); ++i)
                    labeled.push_back(labelnet::oracle_labels(samples[i]));
                continue;
            }
            std::vector<const labelnet::GraphSample*> batch;
            for (std::size_t i = b; i < std::min(samples.size(), b + config.batch_size); ++i) batch.push_back(&samples[i]);
            for (auto& g : labelnet::predict(batch, ck->params, config)) labeled.push_back(std::move(g));
        }
        std::vector<metrics::ObjectRow> rows;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& gt = samples[i].targets->tree;
            metrics::ObjectRow row;
            row.condition = std::string(to_string(condition));
            row.object_seed = records[i].object_seed;
            row.pose_index = records[i].pose_index;
            row.errors = metrics::structure_errors(labeled[i], gt);
            row.tree_f1 = metrics::tree_f1(treeextract::extract_tree(labeled[i]), gt);
            if (o.clustering) {
                const auto seg = graphbuild::segment_clustering(unlabeled_copy(records[i].cloud), o.radius);
                row.segmentation_ap = metrics::segmentation_ap(seg, records[i].cloud);
            }
            rows.push_back(row);
        }
        aggregates.push_back(metrics::aggregate(fmt::format("{} {}", to_string(o.split), to_string(condition)), rows));
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }
    if (total == 0) throw ConfigError("no records to evaluate in " + o.data.string());
    ensure_dir(o.out);
    write_json_file(o.out / "report.json", metrics::report_to_json(aggregates, all_rows));
    const auto table = metrics::report_table(aggregates);
    write_text_file(o.out / "report.txt", table);
    fmt::print("{}", table);
}

void cmd_export(const ExportOptions& o) {
    if (o.tree.has_value() == o.record.has_value()) throw ConfigError("export needs exactly one of --tree or --record");
    KinematicTree tree;
    std::optional<PointCloud> cloud;
    std::string title;
    if (o.record) {
        const auto rec = synthgen::read_record(*o.record);
        tree = rec.object.tree;
        cloud = rec.cloud;
        title = o.record->filename().string();
    } else {
        const auto j = read_json_file(*o.tree);
        try {
            tree = (j.contains("tree") ? j.at("tree") : j).get<KinematicTree>();
        } catch (const Json::exception& e) {
            throw CorruptDataError(std::string("tree file: ") + e.what());
        }
        title = o.tree->filename().string();
    }
    require_valid_tree(tree);
    if (o.cloud) cloud = read_cloud_json(*o.cloud);
    write_tree_exports(o.out, tree, cloud ? &*cloud : nullptr, title);
    fmt::print("exports: {}\n", o.out.string());
}

} // namespace kinehier::cli
