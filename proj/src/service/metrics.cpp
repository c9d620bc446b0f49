#include "socialbot/service/metrics.hpp"

#include <set>
#include <stdexcept>

namespace socialbot::service {

json TurnLogLine::to_json() const {
    return {{"session_id", session_id},
            {"index", index},
            {"ts_ms", ts_ms},
            {"user_text", user_text},
            {"bot_text", bot_text},
            {"qc", qc},
            {"e_q", e_q},
            {"e_r", e_r},
            {"selected_source", selected_source},
            {"rank_score", rank_score ? json(*rank_score) : json(nullptr)}};
}

TurnLogLine TurnLogLine::from_json(const json& j) {
    TurnLogLine t;
    t.session_id = j.at("session_id").get<std::string>();
    t.index = j.at("index").get<std::size_t>();
    t.ts_ms = j.at("ts_ms").get<TimestampMs>();
    t.user_text = j.at("user_text").get<std::string>();
    t.bot_text = j.at("bot_text").get<std::string>();
    t.qc = j.at("qc").get<std::string>();
    t.e_q = j.at("e_q");
    t.e_r = j.at("e_r");
    t.selected_source = j.at("selected_source").get<std::string>();
    if (!j.at("rank_score").is_null()) t.rank_score = j.at("rank_score").get<double>();
    return t;
}

std::string_view to_string(CloseReason r) {
    return r == CloseReason::Timeout ? "timeout" : "user";
}

json SessionLog::to_json() const {
    json turns_j = json::array();
    for (const auto& t : turns) turns_j.push_back(t.to_json());
    return {{"session_id", session_id},
            {"user_id", user_id},
            {"started_ms", started_ms},
            {"closed", closed},
            {"close_reason", close_reason ? json(std::string(to_string(*close_reason))) : json(nullptr)},
            {"turns", turns_j}};
}

double compute_cps(const std::vector<std::size_t>& turn_counts) {
    if (turn_counts.empty()) throw std::invalid_argument("compute_cps: no sessions");
    // integer total first: exact for any realistic log volume
    unsigned long long total = 0;
    for (auto n : turn_counts) total += n;
    return static_cast<double>(total) / static_cast<double>(turn_counts.size());
}

double compute_cps(const std::vector<SessionLog>& logs) {
    std::vector<std::size_t> counts;
    counts.reserve(logs.size());
    for (const auto& l : logs) counts.push_back(l.turns.size());
    return compute_cps(counts);
}

json MetricsReport::to_json() const {
    json hist = json::object();
    for (const auto& [k, v] : histogram) hist[std::to_string(k)] = v;
    return {{"cps", cps}, {"session_count", session_count}, {"turn_count", turn_count},
            {"histogram", hist}, {"nau", nau}};
}

MetricsReport compute_metrics(const std::vector<SessionLog>& logs, const MetricsWindow& window) {
    MetricsReport r;
    std::set<std::string> users;
    std::vector<std::size_t> counts;
    for (const auto& l : logs) {
        if (l.turns.empty()) continue;
        if (window.from_ms && l.started_ms < *window.from_ms) continue;
        if (window.to_ms && l.started_ms >= *window.to_ms) continue;
        counts.push_back(l.turns.size());
        ++r.histogram[l.turns.size()];
        r.turn_count += l.turns.size();
        users.insert(l.user_id.empty() ? l.session_id : l.user_id);
    }
    r.session_count = counts.size();
    r.nau = users.size();
    if (!counts.empty()) r.cps = compute_cps(counts);
    return r;
}

}  // namespace socialbot::service
