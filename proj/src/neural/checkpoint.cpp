#include "kinehier/neural/checkpoint.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/io/binary.hpp"
#include "kinehier/io/files.hpp"

#include <string>

namespace kinehier::neural {

namespace {

constexpr char kMagic[4] = {'K', 'T', 'N', 'N'};

void need(bool ok, const char* what) {
    if (!ok) throw CorruptDataError(std::string("checkpoint: ") + what);
}

} // namespace

std::vector<unsigned char> serialize_parameters(const ParameterSet<float>& params) {
    io::ByteWriter w;
    w.bytes(kMagic, 4);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto& e : params) {
        w.u32(static_cast<std::uint32_t>(e.name.size()));
        w.bytes(e.name.data(), e.name.size());
        w.u32(static_cast<std::uint32_t>(e.tensor.rank()));
        for (auto d : e.tensor.shape) w.u32(static_cast<std::uint32_t>(d));
        for (float v : e.tensor.data) w.f32(v);
    }
    return w.buffer();
}

ParameterSet<float> parse_parameters(const std::vector<unsigned char>& bytes) {
    io::ByteReader r(bytes);
    std::string magic;
    need(r.bytes(magic, 4) && magic == std::string(kMagic, 4), "bad magic");
    std::uint32_t version = 0;
    need(r.u32(version), "truncated header");
    if (version != kCheckpointVersion)
        throw VersionMismatchError("checkpoint format version " + std::to_string(version) + ", expected " +
                                   std::to_string(kCheckpointVersion));
    std::uint32_t count = 0;
    need(r.u32(count), "truncated header");
    ParameterSet<float> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        std::uint32_t len = 0, rank = 0;
        std::string name;
        need(r.u32(len) && r.bytes(name, len), "truncated parameter name");
        need(r.u32(rank) && rank <= 8, "bad rank");
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) {
            std::uint32_t v = 0;
            need(r.u32(v), "truncated shape");
            d = v;
        }
        const std::size_t n = Tensor<float>::element_count(shape);
        need(r.remaining() / 4 >= n, "truncated data");
        auto& t = out.entry(out.add(name, shape)).tensor;
        for (auto& v : t.data) r.f32(v);
    }
    need(r.at_end(), "trailing bytes");
    return out;
}

void deserialize_parameters(const std::vector<unsigned char>& bytes, ParameterSet<float>& params) {
    auto loaded = parse_parameters(bytes);
    if (loaded.size() != params.size()) throw CorruptDataError("checkpoint: parameter count does not match the model");
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& dst = params.entry(i);
        const auto& src = loaded.entry(i);
        if (dst.name != src.name || dst.tensor.shape != src.tensor.shape)
            throw CorruptDataError("checkpoint: parameter '" + src.name + "' does not match the model");
        dst.tensor.data = src.tensor.data;
    }
}

void save_parameters(const std::filesystem::path& path, const ParameterSet<float>& params) {
    io::write_bytes(path, serialize_parameters(params));
}

void load_parameters(const std::filesystem::path& path, ParameterSet<float>& params) {
    deserialize_parameters(io::read_bytes(path), params);
}

} // namespace kinehier::neural
