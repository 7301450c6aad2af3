#include "kinehier/cli/commands.hpp"

#include "kinehier/errors.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

namespace kinehier::cli {

namespace {

synthgen::Condition parse_condition(const std::string& s) {
    try {
        return synthgen::condition_from_string(s);
    } catch (const Error&) {
        throw ConfigError("unknown condition '" + s + "' (expected clean or noisy)");
    }
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Kinematic hierarchy recovery from part-labeled point clouds"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic articulated-object dataset");
    g->add_option("--config", gen.config, "Dataset config JSON")->required();
    g->add_option("--out", gen.out, "Output dataset directory")->capture_default_str();

    PretrainOptions pre;
    std::string pre_condition = "clean";
    std::string pre_config;
    auto* p = app.add_subcommand("pretrain", "Pretrain the part encoder as an autoencoder");
    p->add_option("--data", pre.data, "Dataset directory")->required();
    p->add_option("--config", pre_config, "Model config JSON");
    p->add_option("--out", pre.out, "Output parameter file")->required();
    p->add_option("--condition", pre_condition, "clean or noisy")->capture_default_str();

    TrainOptions tr;
    std::string tr_condition = "clean";
    std::string tr_config, tr_pretrained;
    auto* t = app.add_subcommand("train", "Pretrain (unless given) and train the graph labeling network");
    t->add_option("--data", tr.data, "Dataset directory")->required();
    t->add_option("--config", tr_config, "Model config JSON");
    t->add_option("--out", tr.out, "Output checkpoint file")->required();
    t->add_option("--pretrained", tr_pretrained, "Encoder parameters from `pretrain`");
    t->add_flag("--freeze-encoder", tr.freeze_encoder, "Keep the encoder fixed during training");
    t->add_option("--condition", tr_condition, "clean or noisy")->capture_default_str();

    InferOptions inf;
    auto* i = app.add_subcommand("infer", "Predict the kinematic tree of one cloud and write exports");
    i->add_option("--checkpoint", inf.checkpoint, "Model checkpoint")->required();
    i->add_option("--input", inf.input, "Dataset record header or cloud JSON")->required();
    i->add_option("--out", inf.out, "Output directory")->required();
    i->add_flag("--unlabeled", inf.unlabeled, "Segment the cloud by radius clustering instead of using labels");
    i->add_flag("--use-gt-segmentation", inf.use_gt_segmentation, "Use the part labels stored in the record");
    i->add_option("--radius", inf.radius, "Clustering radius in meters")->capture_default_str();

    EvalOptions ev;
    std::string ev_checkpoint, ev_split = "test";
    std::vector<std::string> ev_conditions;
    auto* e = app.add_subcommand("eval", "Evaluate structure metrics over a dataset split");
    e->add_option("--checkpoint", ev_checkpoint, "Model checkpoint");
    e->add_option("--data", ev.data, "Dataset directory")->required();
    e->add_option("--out", ev.out, "Report directory")->required();
    e->add_option("--split", ev_split, "train or test")->capture_default_str();
    e->add_option("--condition", ev_conditions, "Conditions to evaluate (default: all in the dataset)");
    e->add_flag("--oracle", ev.oracle, "Use probabilities derived from ground truth instead of a model");
    e->add_flag("--clustering", ev.clustering, "Also score the radius-clustering segmentation baseline");
    e->add_option("--radius", ev.radius, "Clustering radius in meters")->capture_default_str();

    ExportOptions ex;
    std::string ex_tree, ex_record, ex_cloud;
    auto* x = app.add_subcommand("export", "Write DOT, URDF-like XML and SVG for a tree");
    x->add_option("--tree", ex_tree, "Tree JSON (as written by infer)");
    x->add_option("--record", ex_record, "Dataset record header (exports its ground truth)");
    x->add_option("--cloud", ex_cloud, "Cloud JSON for the SVG view");
    x->add_option("--out", ex.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kConfig;
    }

    try {
        if (g->parsed()) {
            cmd_gen(gen);
        } else if (p->parsed()) {
            if (!pre_config.empty()) pre.config = pre_config;
            pre.condition = parse_condition(pre_condition);
            cmd_pretrain(pre);
        } else if (t->parsed()) {
            if (!tr_config.empty()) tr.config = tr_config;
            if (!tr_pretrained.empty()) tr.pretrained = tr_pretrained;
            tr.condition = parse_condition(tr_condition);
            cmd_train(tr);
        } else if (i->parsed()) {
            cmd_infer(inf);
        } else if (e->parsed()) {
            if (!ev_checkpoint.empty()) ev.checkpoint = ev_checkpoint;
            try {
                ev.split = synthgen::split_from_string(ev_split);
            } catch (const Error&) {
                throw ConfigError("unknown split '" + ev_split + "'");
            }
            for (const auto& c : ev_conditions) ev.conditions.push_back(parse_condition(c));
            cmd_eval(ev);
        } else if (x->parsed()) {
            if (!ex_tree.empty()) ex.tree = ex_tree;
            if (!ex_record.empty()) ex.record = ex_record;
            if (!ex_cloud.empty()) ex.cloud = ex_cloud;
            cmd_export(ex);
        }
    } catch (const CorruptDataError& err) {
        if (err.record_index() >= 0)
            fmt::print(stderr, "error: corrupt data (record {}): {}\n", err.record_index(), err.what());
        else
            fmt::print(stderr, "error: corrupt data: {}\n", err.what());
        return kCorrupt;
    } catch (const std::exception& err) {
        fmt::print(stderr, "error: {}\n", err.what());
        return exit_code_for(err);
    }
    return kOk;
}

} // namespace kinehier::cli
