#pragma once

#include "kinehier/neural/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace kinehier::neural {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "KTNN", u32 version, u32 count, then per parameter: u32 name length,
/// name bytes, u32 rank, u32 dims, f32 data (all little-endian).
std::vector<unsigned char> serialize_parameters(const ParameterSet<float>& params);

/// Loads values into `params`, which must already hold the same names and
/// shapes in the same order. Throws CorruptDataError / VersionMismatchError.
void deserialize_parameters(const std::vector<unsigned char>& bytes, ParameterSet<float>& params);

/// Rebuilds a parameter set (all entries trainable) from bytes.
ParameterSet<float> parse_parameters(const std::vector<unsigned char>& bytes);

void save_parameters(const std::filesystem::path& path, const ParameterSet<float>& params);
void load_parameters(const std::filesystem::path& path, ParameterSet<float>& params);

} // namespace kinehier::neural
