#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "socialbot/service/metrics.hpp"
#include "socialbot/service/resources.hpp"

namespace socialbot::service {

class UnknownSession : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SessionClosed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChatReply {
    std::string session_id;
    std::string response;
    std::optional<std::size_t> turn;  // absent when nothing was recorded
    std::string trace_id;
    bool closed = false;
    std::optional<CloseReason> close_reason;

    json to_json() const;
};

struct SessionOptions {
    std::string user_id;
    std::optional<PersonaProfile> profile;
};

/// Session orchestration over an immutable Resources snapshot. Turns of one
/// session are serialised; distinct sessions run concurrently.
class Engine {
public:
    Engine(std::shared_ptr<const Resources> resources, std::shared_ptr<const Clock> clock);

    std::string create_session(SessionOptions options = {});

    /// Throws UnknownSession, SessionClosed, or std::invalid_argument for
    /// empty text. A turn arriving after the timeout closes the session and
    /// returns the break prompt without recording a turn.
    ChatReply chat_turn(const std::string& session_id, const std::string& text);

    void close_session(const std::string& session_id, CloseReason reason = CloseReason::User);

    /// Full per-turn trace, or nullopt.
    std::optional<json> get_trace(const std::string& session_id, std::size_t turn) const;

    SessionLog session_log(const std::string& session_id) const;
    std::vector<SessionLog> logs() const;  // creation order
    MetricsReport metrics(const MetricsWindow& window = {}) const;

    /// Replaces the snapshot used by turns that start afterwards.
    void swap_resources(std::shared_ptr<const Resources> next);
    std::shared_ptr<const Resources> resources() const;

    /// Appends every recorded turn to this JSONL file.
    void set_log_file(const std::filesystem::path& path);

private:
    struct Session;

    std::shared_ptr<Session> find(const std::string& id) const;
    void append_log(const TurnLogLine& line);

    std::shared_ptr<const Clock> clock_;
    mutable std::mutex resources_mu_;
    std::shared_ptr<const Resources> resources_;

    mutable std::mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::vector<std::string> order_;
    SessionIdGenerator ids_;

    std::mutex log_mu_;
    std::ofstream log_file_;
};

/// Per-turn random stream, a pure function of the engine seed, the session
/// id and the turn index.
std::uint64_t turn_seed(std::uint64_t seed, const std::string& session_id, std::size_t turn);

}  // namespace socialbot::service
