#include "kinehier/labelnet/config.hpp"

#include "kinehier/errors.hpp"

#include <set>
#include <string>

namespace kinehier::labelnet {

void check_config(const ModelConfig& c) {
    auto fail = [](const std::string& what) { throw ConfigError("model config: " + what); };
    if (c.encoder_widths.empty()) fail("encoder_widths is empty");
    for (auto w : c.encoder_widths)
        if (w == 0) fail("encoder widths must be positive");
    if (c.stage_width == 0 || c.stages == 0 || c.head_width == 0) fail("network widths must be positive");
    if (c.samples_per_part == 0) fail("samples_per_part must be positive");
    if (c.decoder_width == 0 || c.decoder_points == 0) fail("decoder sizes must be positive");
    if (c.pretrain_epochs < 0 || c.train_epochs < 0) fail("epochs must be non-negative");
    if (!(c.pretrain_lr > 0) || !(c.train_lr > 0)) fail("learning rates must be positive");
    if (c.pretrain_momentum < 0 || c.pretrain_momentum >= 1) fail("momentum must be in [0, 1)");
    if (c.batch_size == 0 || c.pretrain_batch == 0 || c.pretrain_parts == 0) fail("batch sizes must be positive");
    for (double w : {c.weights.motion, c.weights.root, c.weights.exist, c.weights.direction})
        if (!(w >= 0)) fail("loss weights must be non-negative");
}

Json config_to_json(const ModelConfig& c) {
    return Json{{"format_version", kConfigFormatVersion},
                {"encoder_widths", c.encoder_widths},
                {"stage_width", c.stage_width},
                {"stages", c.stages},
                {"samples_per_part", c.samples_per_part},
                {"head_width", c.head_width},
                {"decoder_width", c.decoder_width},
                {"decoder_points", c.decoder_points},
                {"loss_weights",
                 {{"motion", c.weights.motion},
                  {"root", c.weights.root},
                  {"exist", c.weights.exist},
                  {"direction", c.weights.direction}}},
                {"pretrain_epochs", c.pretrain_epochs},
                {"pretrain_lr", c.pretrain_lr},
                {"pretrain_momentum", c.pretrain_momentum},
                {"pretrain_batch", c.pretrain_batch},
                {"pretrain_parts", c.pretrain_parts},
                {"train_epochs", c.train_epochs},
                {"train_lr", c.train_lr},
                {"batch_size", c.batch_size},
                {"freeze_encoder", c.freeze_encoder},
                {"seed", c.seed}};
}

ModelConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("model config must be a JSON object");
    static const std::set<std::string> known{
        "format_version", "encoder_widths", "stage_width",    "stages",          "samples_per_part",
        "head_width",     "decoder_width",  "decoder_points", "loss_weights",    "pretrain_epochs",
        "pretrain_lr",    "pretrain_momentum", "pretrain_batch", "pretrain_parts", "train_epochs",
        "train_lr",       "batch_size",     "freeze_encoder", "seed"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("model config: unknown key '" + key + "'");
    if (j.contains("format_version") && j.at("format_version").get<int>() != kConfigFormatVersion)
        throw VersionMismatchError("model config format_version " + j.at("format_version").dump());
    ModelConfig c;
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("encoder_widths", c.encoder_widths);
        get("stage_width", c.stage_width);
        get("stages", c.stages);
        get("samples_per_part", c.samples_per_part);
        get("head_width", c.head_width);
        get("decoder_width", c.decoder_width);
        get("decoder_points", c.decoder_points);
        if (j.contains("loss_weights")) {
            const auto& w = j.at("loss_weights");
            for (const auto& [key, value] : w.items())
                if (key != "motion" && key != "root" && key != "exist" && key != "direction")
                    throw ConfigError("model config: unknown loss weight '" + key + "'");
            c.weights.motion = w.value("motion", c.weights.motion);
            c.weights.root = w.value("root", c.weights.root);
            c.weights.exist = w.value("exist", c.weights.exist);
            c.weights.direction = w.value("direction", c.weights.direction);
        }
        get("pretrain_epochs", c.pretrain_epochs);
        get("pretrain_lr", c.pretrain_lr);
        get("pretrain_momentum", c.pretrain_momentum);
        get("pretrain_batch", c.pretrain_batch);
        get("pretrain_parts", c.pretrain_parts);
        get("train_epochs", c.train_epochs);
        get("train_lr", c.train_lr);
        get("batch_size", c.batch_size);
        get("freeze_encoder", c.freeze_encoder);
        get("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    check_config(c);
    return c;
}

} // namespace kinehier::labelnet
