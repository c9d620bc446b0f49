#include "socialbot/util/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "socialbot/util/text.hpp"

namespace socialbot {

std::size_t read_jsonl(const std::filesystem::path& path,
                       const std::function<void(const json&, std::size_t)>& visit,
                       std::vector<MalformedLine>* malformed) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        ++seen;
        try {
            visit(json::parse(line), lineno);
        } catch (const std::exception& e) {
            if (malformed == nullptr) {
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
            malformed->push_back({lineno, e.what()});
        }
    }
    return seen;
}

std::vector<json> load_jsonl(const std::filesystem::path& path) {
    std::vector<json> out;
    read_jsonl(path, [&](const json& j, std::size_t) { out.push_back(j); });
    return out;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace socialbot
