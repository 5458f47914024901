#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace sdfm {

// Writes content to path via a temporary file plus rename, so readers never
// observe a partially written file. Creates parent directories as needed.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit hash; used for input fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view data);

std::string to_hex(std::uint64_t value);

// "%.17g" rendering: shortest fixed-format string that round-trips a double.
std::string format_double(double value);

}  // namespace sdfm
