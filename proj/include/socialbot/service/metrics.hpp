#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socialbot/core/types.hpp"

namespace socialbot::service {

/// One line of the append-only session log.
struct TurnLogLine {
    std::string session_id;
    std::size_t index = 0;
    TimestampMs ts_ms = 0;
    std::string user_text;
    std::string bot_text;
    std::string qc;
    json e_q = json::object();
    json e_r = json::object();
    std::string selected_source;
    std::optional<double> rank_score;

    json to_json() const;
    static TurnLogLine from_json(const json& j);
    bool operator==(const TurnLogLine&) const = default;
};

enum class CloseReason { User, Timeout };

std::string_view to_string(CloseReason r);

struct SessionLog {
    std::string session_id;
    std::string user_id;
    TimestampMs started_ms = 0;
    std::vector<TurnLogLine> turns;
    bool closed = false;
    std::optional<CloseReason> close_reason;

    json to_json() const;
    bool operator==(const SessionLog&) const = default;
};

/// Mean number of turns per session. Throws std::invalid_argument when empty.
double compute_cps(const std::vector<SessionLog>& logs);
double compute_cps(const std::vector<std::size_t>& turn_counts);

struct MetricsWindow {
    std::optional<TimestampMs> from_ms;  // inclusive
    std::optional<TimestampMs> to_ms;    // exclusive
};

struct MetricsReport {
    double cps = 0.0;
    std::size_t session_count = 0;
    std::size_t turn_count = 0;
    std::map<std::size_t, std::size_t> histogram;  // turns per session -> sessions
    std::size_t nau = 0;                            // distinct users active in the window

    json to_json() const;
};

/// Sessions that started inside the window and hold at least one turn.
MetricsReport compute_metrics(const std::vector<SessionLog>& logs, const MetricsWindow& window = {});

}  // namespace socialbot::service
