#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace percept {

// Hex SHA-256 digest of a byte string.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// 64-bit FNV-1a. Stable across platforms, used for feature hashing.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Pearson correlation; nullopt when either side has zero variance or
// fewer than two points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Average ranks (ties share the mean rank), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Shortest round-trip decimal form used in CSV outputs.
std::string format_double(double value);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

}  // namespace percept
