#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/error.hpp"

namespace percept {

// Reads one JSON record per line. Blank lines are skipped; a malformed or
// schema-violating line raises kSchema naming the 1-based line number.
template <typename T>
std::vector<T> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<T> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(nlohmann::json::parse(line).get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchema,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return records;
}

template <typename T>
std::string dump_jsonl(const std::vector<T>& records) {
  std::string out;
  for (const auto& record : records) {
    out += nlohmann::json(record).dump();
    out += '\n';
  }
  return out;
}

template <typename T>
void save_jsonl(const std::filesystem::path& path, const std::vector<T>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const std::string text = dump_jsonl(records);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace percept
