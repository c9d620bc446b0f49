#include "socialbot/retrieval/filter.hpp"

#include "socialbot/util/text.hpp"

namespace socialbot::retrieval {

std::string_view to_string(DropReason r) {
    switch (r) {
        case DropReason::None: return "none";
        case DropReason::Pii: return "pii";
        case DropReason::MessyCode: return "messy-code";
        case DropReason::Inappropriate: return "inappropriate";
        case DropReason::PersonaConflict: return "persona-conflict";
        case DropReason::Spelling: return "spelling";
        case DropReason::Empty: return "empty";
    }
    return "none";
}

FilterRules FilterRules::load(const std::filesystem::path& path) { return from_json(load_json(path)); }

FilterRules FilterRules::from_json(const json& j) {
    FilterRules r;
    for (const auto& p : j.value("pii", json::array())) {
        const auto src = p.get<std::string>();
        r.pii_.emplace_back(src, std::regex(src, std::regex::ECMAScript | std::regex::icase));
    }
    for (const auto& t : j.value("blocklist", json::array())) r.blocklist_.push_back(text::words(t.get<std::string>()));
    for (const auto& c : j.value("persona_claims", json::array())) {
        PersonaClaim claim;
        claim.source = c.at("pattern").get<std::string>();
        claim.pattern = std::regex(claim.source, std::regex::ECMAScript | std::regex::icase);
        claim.key = c.at("key").get<std::string>();
        claim.value = c.at("value").get<std::string>();
        r.persona_claims_.push_back(std::move(claim));
    }
    for (const auto& w : j.value("misspellings", json::array())) r.misspellings_.insert(text::normalize(w.get<std::string>()));
    return r;
}

FilterVerdict FilterRules::check_text(const std::string& s) const {
    if (text::trim(s).empty()) return FilterVerdict::drop(DropReason::Empty, "empty text");
    if (!text::is_clean_text(s)) return FilterVerdict::drop(DropReason::MessyCode, "control or invalid bytes");
    for (const auto& [src, re] : pii_) {
        if (std::regex_search(s, re)) return FilterVerdict::drop(DropReason::Pii, src);
    }
    const auto w = text::words(s);
    for (const auto& term : blocklist_) {
        if (text::contains_phrase(w, term)) return FilterVerdict::drop(DropReason::Inappropriate, "blocklisted term");
    }
    for (const auto& word : w) {
        if (misspellings_.count(word) > 0) return FilterVerdict::drop(DropReason::Spelling, word);
    }
    return FilterVerdict::kept();
}

FilterVerdict FilterRules::check_response(const std::string& s, const PersonaProfile& bot) const {
    FilterVerdict v = check_text(s);
    if (!v.keep) return v;
    for (const auto& claim : persona_claims_) {
        if (!std::regex_search(s, claim.pattern)) continue;
        auto it = bot.keys.find(claim.key);
        if (it != bot.keys.end() && it->second != "unknown" && it->second != claim.value) {
            return FilterVerdict::drop(DropReason::PersonaConflict, claim.key + "=" + claim.value);
        }
    }
    return FilterVerdict::kept();
}

RawPair RawPair::from_json(const json& j) {
    RawPair r;
    r.query = j.at("query").get<std::string>();
    r.response = j.at("response").get<std::string>();
    if (j.contains("context")) r.context = j.at("context").get<std::vector<std::string>>();
    if (j.contains("meta")) r.meta = j.at("meta");
    return r;
}

FilterVerdict filter_pair(const RawPair& raw, const FilterRules& rules, const PersonaProfile& bot) {
    FilterVerdict q = rules.check_text(raw.query);
    if (!q.keep) return q;
    return rules.check_response(raw.response, bot);
}

}  // namespace socialbot::retrieval
