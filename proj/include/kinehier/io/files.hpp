#pragma once

#include <filesystem>
#include <vector>

namespace kinehier::io {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

} // namespace kinehier::io
