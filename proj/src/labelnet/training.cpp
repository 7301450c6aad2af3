#include "kinehier/labelnet/training.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/labelnet/model.hpp"
#include "kinehier/neural/checkpoint.hpp"
#include "kinehier/neural/optim.hpp"
#include "kinehier/random.hpp"

#include <algorithm>
#include <numeric>

namespace kinehier::labelnet {

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
    }
    return order;
}

ParameterSet<float> make_autoencoder(const ModelConfig& c) {
    ParameterSet<float> p;
    register_encoder(p, c);
    register_decoder(p, c);
    Rng rng(derive_seed({c.seed, 0x61757465}));
    neural::init_mlp(p, kEncoder, c.encoder_widths.size(), rng);
    neural::init_mlp(p, kDecoder, 2, rng);
    return p;
}

/// Mean Chamfer between each part and its reconstruction.
Var<float> autoencoder_batch(Tape<float>& tape, const ParameterSet<float>& p, const ModelConfig& c,
                             const std::vector<const std::vector<float>*>& parts) {
    const std::size_t n = c.samples_per_part;
    std::vector<float> pts;
    std::vector<std::size_t> offsets{0};
    for (const auto* part : parts) {
        if (part->size() != 3 * n) throw ShapeError("pretraining part does not have samples_per_part points");
        pts.insert(pts.end(), part->begin(), part->end());
        offsets.push_back(offsets.back() + n);
    }
    const auto x = tape.constant(offsets.back(), 3, std::move(pts));
    const auto code = neural::pointnet_encode(tape, p, kEncoder, c.encoder_widths.size(), x, offsets);
    const auto recon = neural::apply_mlp(tape, p, kDecoder, 2, code);
    Var<float> total = tape.constant(1, 1, {0.0f});
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto r = neural::reshape(neural::slice_rows(recon, i, 1), c.decoder_points, 3);
        total = neural::add(total, neural::chamfer(r, neural::slice_rows(x, i * n, n)));
    }
    return neural::affine(total, 1.0f / static_cast<float>(parts.size()));
}

} // namespace

std::vector<std::vector<float>> pretrain_parts(const std::vector<GraphSample>& samples, const ModelConfig& config) {
    const std::size_t n = config.samples_per_part;
    std::vector<std::vector<float>> all;
    for (const auto& s : samples) {
        for (std::size_t p = 0; p < s.part_count(); ++p) {
            const auto begin = s.points.begin() + static_cast<long>(p * n * 3);
            all.emplace_back(begin, begin + static_cast<long>(n * 3));
        }
    }
    const auto order = shuffled(all.size(), derive_seed({config.seed, 0x70617274}));
    std::vector<std::vector<float>> out;
    for (std::size_t i = 0; i < order.size() && out.size() < config.pretrain_parts; ++i) out.push_back(all[order[i]]);
    return out;
}

double autoencoder_loss(const std::vector<std::vector<float>>& parts, const ParameterSet<float>& params,
                        const ModelConfig& config) {
    if (parts.empty()) throw ConfigError("autoencoder loss over an empty part set");
    double sum = 0;
    for (std::size_t b = 0; b < parts.size(); b += config.pretrain_batch) {
        std::vector<const std::vector<float>*> batch;
        for (std::size_t i = b; i < std::min(parts.size(), b + config.pretrain_batch); ++i) batch.push_back(&parts[i]);
        Tape<float> tape;
        sum += static_cast<double>(autoencoder_batch(tape, params, config, batch).value()) *
               static_cast<double>(batch.size());
    }
    return sum / static_cast<double>(parts.size());
}

PretrainResult pretrain_encoder(const std::vector<std::vector<float>>& parts, const ModelConfig& config,
                                const EpochCallback& on_epoch) {
    check_config(config);
    if (parts.empty()) throw ConfigError("pretraining needs at least one part point set");
    PretrainResult res{make_autoencoder(config), {}, 0.0};
    res.initial_loss = autoencoder_loss(parts, res.params, config);
    neural::NesterovSgd<float> opt(config.pretrain_lr, config.pretrain_momentum);
    for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
        const auto order = shuffled(parts.size(), derive_seed({config.seed, 0x70726574, static_cast<std::uint64_t>(epoch)}));
        double sum = 0;
        std::size_t batches = 0;
        for (std::size_t b = 0; b < order.size(); b += config.pretrain_batch) {
            std::vector<const std::vector<float>*> batch;
            for (std::size_t i = b; i < std::min(order.size(), b + config.pretrain_batch); ++i)
                batch.push_back(&parts[order[i]]);
            res.params.zero_grad();
            Tape<float> tape;
            const auto loss = autoencoder_batch(tape, res.params, config, batch);
            tape.backward(loss);
            tape.accumulate_parameter_grads(res.params);
            opt.step(res.params);
            sum += loss.value();
            ++batches;
        }
        res.loss_curve.push_back(sum / static_cast<double>(batches));
        if (on_epoch) on_epoch(epoch, res.loss_curve.back());
    }
    return res;
}

TrainResult train(const std::vector<GraphSample>& samples, const ModelConfig& config,
                  const ParameterSet<float>& initial, const EpochCallback& on_epoch) {
    check_config(config);
    if (samples.empty()) throw ConfigError("training needs at least one sample");
    for (const auto& s : samples)
        if (!s.targets) throw TrainingDataError("training sample without targets");
    TrainResult res{make_model(config), {}};
    res.params.assign_from(initial);
    res.params.set_trainable(kDecoder, false);
    if (config.freeze_encoder) res.params.set_trainable(kEncoder, false);

    neural::Adam<float> opt({config.train_lr});
    for (int epoch = 0; epoch < config.train_epochs; ++epoch) {
        const auto order = shuffled(samples.size(), derive_seed({config.seed, 0x74726e, static_cast<std::uint64_t>(epoch)}));
        double sum = 0;
        std::size_t batches = 0;
        for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
            std::vector<const GraphSample*> batch;
            std::vector<const GraphTargets*> targets;
            for (std::size_t i = b; i < std::min(order.size(), b + config.batch_size); ++i) {
                batch.push_back(&samples[order[i]]);
                targets.push_back(&*samples[order[i]].targets);
            }
            res.params.zero_grad();
            Tape<float> tape;
            const auto input = assemble_batch<float>(batch, config.samples_per_part);
            const auto out = forward(tape, res.params, config, input);
            const auto loss = batch_loss(tape, out, input, targets, config.weights);
            if (loss.requires_grad()) {
                tape.backward(loss);
                tape.accumulate_parameter_grads(res.params);
            }
            opt.step(res.params);
            sum += loss.value();
            ++batches;
        }
        res.loss_curve.push_back(sum / static_cast<double>(batches));
        if (on_epoch) on_epoch(epoch, res.loss_curve.back());
    }
    return res;
}

double evaluate_loss(const std::vector<GraphSample>& samples, const ParameterSet<float>& params,
                     const ModelConfig& config) {
    if (samples.empty()) throw ConfigError("loss over an empty sample set");
    double sum = 0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < samples.size(); b += config.batch_size) {
        std::vector<const GraphSample*> batch;
        std::vector<const GraphTargets*> targets;
        for (std::size_t i = b; i < std::min(samples.size(), b + config.batch_size); ++i) {
            batch.push_back(&samples[i]);
            targets.push_back(&*samples[i].targets);
        }
        Tape<float> tape;
        const auto input = assemble_batch<float>(batch, config.samples_per_part);
        sum += batch_loss(tape, forward(tape, params, config, input), input, targets, config.weights).value();
        ++batches;
    }
    return sum / static_cast<double>(batches);
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
    auto p = checkpoint;
    p += ".json";
    return p;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet<float>& params, const ModelConfig& config,
                     const std::vector<double>& pretrain_curve, const std::vector<double>& train_curve) {
    neural::save_parameters(path, params);
    Json side{{"checkpoint_format_version", neural::kCheckpointVersion},
              {"config", config_to_json(config)},
              {"seed", config.seed},
              {"parameter_count", params.scalar_count()},
              {"pretrain_loss_curve", pretrain_curve},
              {"train_loss_curve", train_curve}};
    write_json_file(sidecar_path(path), side);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const auto side = read_json_file(sidecar_path(path));
    Checkpoint ck;
    try {
        if (side.at("checkpoint_format_version").get<std::uint32_t>() != neural::kCheckpointVersion)
            throw VersionMismatchError("checkpoint sidecar format version " + side.at("checkpoint_format_version").dump());
        ck.config = config_from_json(side.at("config"));
        ck.pretrain_curve = side.at("pretrain_loss_curve").get<std::vector<double>>();
        ck.train_curve = side.at("train_loss_curve").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptDataError(std::string("checkpoint sidecar: ") + e.what());
    }
    ck.params = make_model(ck.config);
    neural::load_parameters(path, ck.params);
    return ck;
}

} // namespace kinehier::labelnet
