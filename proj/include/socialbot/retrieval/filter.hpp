#pragma once

#include <filesystem>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "socialbot/core/types.hpp"

namespace socialbot::retrieval {

enum class DropReason { None, Pii, MessyCode, Inappropriate, PersonaConflict, Spelling, Empty };

std::string_view to_string(DropReason r);

struct FilterVerdict {
    bool keep = true;
    DropReason reason = DropReason::None;
    std::string detail;

    static FilterVerdict kept() { return {}; }
    static FilterVerdict drop(DropReason r, std::string d) { return {false, r, std::move(d)}; }
};

/// A response matching `pattern` claims persona `key` = `value`.
struct PersonaClaim {
    std::string source;
    std::regex pattern;
    std::string key;
    std::string value;
};

/// Data-quality rules shipped as one JSON file:
/// {"pii": [regex...], "blocklist": [term...], "persona_claims": [{pattern,key,value}],
///  "misspellings": [word...]}
class FilterRules {
public:
    static FilterRules load(const std::filesystem::path& path);
    static FilterRules from_json(const json& j);

    /// Rules for one side of a pair (PII, messy code, blocklist, spelling).
    FilterVerdict check_text(const std::string& text) const;

    /// Full check for a candidate response, including persona conflicts.
    FilterVerdict check_response(const std::string& text, const PersonaProfile& bot) const;

    const std::vector<std::pair<std::string, std::regex>>& pii() const { return pii_; }

private:
    std::vector<std::pair<std::string, std::regex>> pii_;
    std::vector<std::vector<std::string>> blocklist_;
    std::vector<PersonaClaim> persona_claims_;
    std::set<std::string> misspellings_;
};

struct RawPair {
    std::string query;
    std::string response;
    std::vector<std::string> context;
    json meta = json::object();

    static RawPair from_json(const json& j);  // throws on missing query/response
};

FilterVerdict filter_pair(const RawPair& raw, const FilterRules& rules, const PersonaProfile& bot);

}  // namespace socialbot::retrieval
