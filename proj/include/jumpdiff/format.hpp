#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace jumpdiff {

// Fixed 17-significant-digit rendering used by every text artifact.
// Non-finite values render as "nan", "inf" or "-inf".
std::string format_number(double value);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace jumpdiff
