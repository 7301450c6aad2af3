#pragma once

#include "kinehier/synthgen/dataset.hpp"

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kinehier::cli {

namespace fs = std::filesystem;

/// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfig = 2,
    kIo = 3,
    kCorrupt = 4,
    kVersion = 5,
};

/// Maps library exceptions onto the exit-code contract.
int exit_code_for(const std::exception& error);

struct GenOptions {
    fs::path config;
    fs::path out = "dataset";
};

struct PretrainOptions {
    fs::path data;
    std::optional<fs::path> config;
    fs::path out;
    synthgen::Condition condition = synthgen::Condition::Clean;
};

struct TrainOptions {
    fs::path data;
    std::optional<fs::path> config;
    fs::path out;
    std::optional<fs::path> pretrained;
    bool freeze_encoder = false;
    synthgen::Condition condition = synthgen::Condition::Clean;
};

struct InferOptions {
    fs::path checkpoint;
    fs::path input;  // dataset record header or cloud JSON
    fs::path out;
    bool unlabeled = false;
    bool use_gt_segmentation = false;
    double radius = 0.02;
};

struct EvalOptions {
    std::optional<fs::path> checkpoint;  // required unless oracle
    fs::path data;
    fs::path out;
    synthgen::Split split = synthgen::Split::Test;
    std::vector<synthgen::Condition> conditions;  // empty: all in the manifest
    bool oracle = false;
    bool clustering = false;
    double radius = 0.02;
};

struct ExportOptions {
    std::optional<fs::path> tree;    // tree JSON (as written by infer) ...
    std::optional<fs::path> record;  // ... or a record, exporting its ground truth
    std::optional<fs::path> cloud;   // optional cloud JSON for the SVG
    fs::path out;
};

/// Each command prints a short summary to stdout and throws on failure.
synthgen::DatasetManifest cmd_gen(const GenOptions& options);
void cmd_pretrain(const PretrainOptions& options);
void cmd_train(const TrainOptions& options);
void cmd_infer(const InferOptions& options);
void cmd_eval(const EvalOptions& options);
void cmd_export(const ExportOptions& options);

/// Cloud JSON: {"points": [[x, y, z], ...], "labels": [..] (optional)}.
PointCloud read_cloud_json(const fs::path& path);
void write_cloud_json(const fs::path& path, const PointCloud& cloud);

/// Parses argv and dispatches; returns the exit code.
int run(int argc, const char* const* argv);

} // namespace kinehier::cli
