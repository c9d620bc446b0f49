#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace socialbot {

using json = nlohmann::json;

/// Thrown when an input file is missing or structurally unusable.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MalformedLine {
    std::size_t line = 0;  // 1-based
    std::string message;
};

/// Reads a line-delimited JSON file. Blank lines are skipped; lines that fail
/// to parse, or that `visit` rejects by throwing, are collected in `malformed`.
/// Returns the number of non-blank lines seen.
std::size_t read_jsonl(const std::filesystem::path& path,
                       const std::function<void(const json&, std::size_t line)>& visit,
                       std::vector<MalformedLine>* malformed = nullptr);

/// Strict variant: any malformed line throws DataError naming the line.
std::vector<json> load_jsonl(const std::filesystem::path& path);

json load_json(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace socialbot
