#include "percept/util.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "percept/error.hpp"

namespace percept {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownStatement: return "unknown_statement";
    case ErrorCode::kEmptyContent: return "empty_content";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kInvalidParameter: return "invalid_parameter";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSchema: return "schema_violation";
    case ErrorCode::kEmptyRecord: return "empty_record";
    case ErrorCode::kMixedDoc: return "mixed_doc";
    case ErrorCode::kInsufficientComparisons: return "insufficient_comparisons";
    case ErrorCode::kInsufficientOverlap: return "insufficient_overlap";
    case ErrorCode::kUndefinedCorrelation: return "undefined_correlation";
    case ErrorCode::kNoPairableValues: return "no_pairable_values";
    case ErrorCode::kDegenerateVariance: return "degenerate_variance";
    case ErrorCode::kTooFewDocuments: return "too_few_documents";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kCatalogMismatch: return "catalog_mismatch";
    case ErrorCode::kEmptyText: return "empty_text";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kRankDeficient: return "rank_deficient";
    case ErrorCode::kSingularDesign: return "singular_design";
    case ErrorCode::kMissingProfile: return "missing_profile";
    case ErrorCode::kMissingDimension: return "missing_dimension";
    case ErrorCode::kDegenerateGroups: return "degenerate_groups";
  }
  return "unknown";
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0f]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t hash = seed;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // Relative threshold: a column that only differs by rounding is constant.
  const double scale_x = std::max(1.0, mx * mx) * static_cast<double>(n);
  const double scale_y = std::max(1.0, my * my) * static_cast<double>(n);
  if (sxx <= 1e-24 * scale_x || syy <= 1e-24 * scale_y) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  std::array<char, 64> buffer{};
  auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) return "NA";
  return std::string(buffer.data(), end);
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

}  // namespace percept
