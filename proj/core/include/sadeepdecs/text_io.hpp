#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sadeepdecs {

/// Shortest decimal form that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a full-string decimal number; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

/// Comma-separated rows; blank lines skipped, no quoting.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a; used for trace and config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace sadeepdecs
