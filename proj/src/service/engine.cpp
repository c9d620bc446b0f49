#include "socialbot/service/engine.hpp"

#include <random>

#include "socialbot/util/text.hpp"

namespace socialbot::service {

json ChatReply::to_json() const {
    return {{"session_id", session_id},
            {"response", response},
            {"turn", turn ? json(*turn) : json(nullptr)},
            {"trace_id", trace_id.empty() ? json(nullptr) : json(trace_id)},
            {"closed", closed},
            {"close_reason", close_reason ? json(std::string(to_string(*close_reason))) : json(nullptr)}};
}

std::uint64_t turn_seed(std::uint64_t seed, const std::string& session_id, std::size_t turn) {
    std::string key = std::to_string(seed) + "/" + session_id + "/" + std::to_string(turn);
    return text::fnv1a64(key);
}

struct Engine::Session {
    std::mutex mu;
    SessionLog log;
    std::optional<PersonaProfile> profile;
    WorkingMemory memory;
    chat::ChatSessionState chat;
    chat::TurnMeta last_meta;
    std::optional<std::string> running_skill;
    std::map<std::string, json> skill_memory;
    std::map<std::string, std::size_t> topic_comment_counter;
    std::vector<json> traces;
};

Engine::Engine(std::shared_ptr<const Resources> resources, std::shared_ptr<const Clock> clock)
    : clock_(std::move(clock)), resources_(std::move(resources)) {
    if (!resources_ || !clock_) throw std::invalid_argument("Engine: resources and clock required");
}

std::string Engine::create_session(SessionOptions options) {
    auto s = std::make_shared<Session>();
    s->log.session_id = ids_.next();
    s->log.user_id = std::move(options.user_id);
    s->log.started_ms = clock_->now_ms();
    s->profile = std::move(options.profile);
    s->memory.session_start = s->log.started_ms;
    std::lock_guard lock(sessions_mu_);
    sessions_[s->log.session_id] = s;
    order_.push_back(s->log.session_id);
    return s->log.session_id;
}

std::shared_ptr<Engine::Session> Engine::find(const std::string& id) const {
    std::lock_guard lock(sessions_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownSession("unknown session: " + id);
    return it->second;
}

ChatReply Engine::chat_turn(const std::string& session_id, const std::string& text) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    Session& S = *session;
    if (S.log.closed) throw SessionClosed("session closed: " + session_id);

    const auto res = resources();
    const TimestampMs now = clock_->now_ms();
    ChatReply reply;
    reply.session_id = session_id;
    if (now - S.log.started_ms > res->config.timeout_ms()) {
        S.log.closed = true;
        S.log.close_reason = CloseReason::Timeout;
        reply.response = res->config.break_prompt;
        reply.closed = true;
        reply.close_reason = CloseReason::Timeout;
        return reply;
    }
    if (text::trim(text).empty()) throw std::invalid_argument("chat_turn: empty message");

    const std::size_t turn = S.memory.turns.size();
    std::mt19937_64 rng(turn_seed(res->config.seed, session_id, turn));
    const PersonaProfile* user = S.profile ? &*S.profile : nullptr;
    const auto& empathy = *res->empathy;

    auto ann = empathy.annotate(text, S.memory, user, res->bot, empathy::TopicDecision::keep());
    DialogueState state = ann.state;

    // topic manager: indicators of the previous reply plus blandness of this input
    const auto sw = dm::should_switch_topic(state, S.last_meta, empathy, res->switch_model.get());
    json topic_j{{"features", sw.features.to_json()},
                 {"switch", sw.switch_topic},
                 {"model_score", sw.model_score ? json(*sw.model_score) : json(nullptr)},
                 {"topic", nullptr}};
    const dm::TopicEntry* new_topic = nullptr;
    if (sw.switch_topic) {
        auto discussed = dm::discussed_topics(S.memory);
        const std::string current = state.e_q.get("topic");
        if (current != "none" && current != "unknown") discussed.insert(text::normalize(current));
        auto ranked = dm::recommend_topic(state, *res->topics, user, discussed, res->topic_context(now));
        if (!ranked.empty()) {
            new_topic = ranked.front().entry;
            state.e_r = empathy.derive_response_empathy(state.e_q, res->bot,
                                                        empathy::TopicDecision::switch_to(new_topic->topic));
            topic_j["topic"] = new_topic->topic;
            topic_j["score"] = ranked.front().score;
        } else {
            topic_j["note"] = "no undiscussed topic available";
        }
    }

    const auto action = dm::select_action(state, S.running_skill, *res->skills);
    std::string response;
    chat::TurnTrace trace;
    bool editorial_used = false;
    if (action.kind == dm::ActionSelection::Kind::Skill) {
        const dm::SkillSpec* spec = res->skills->find(action.skill);
        json& mem = S.skill_memory[action.skill];
        if (!mem.is_object()) mem = json::object();
        const auto out = spec->handler->handle(state, mem);
        response = out.text;
        S.running_skill = out.terminate ? std::nullopt : std::optional<std::string>(action.skill);
        trace.query = state.query;
        trace.qc = state.qc;
        trace.e_q = state.e_q;
        trace.e_r = state.e_r;
        trace.selected_source = "skill:" + action.skill;
    } else if (new_topic != nullptr && !new_topic->comments.empty()) {
        std::size_t& k = S.topic_comment_counter[text::normalize(new_topic->topic)];
        response = new_topic->comments[k % new_topic->comments.size()];
        ++k;
        trace.query = state.query;
        trace.qc = state.qc;
        trace.e_q = state.e_q;
        trace.e_r = state.e_r;
        trace.selected_source = "topic";
    } else {
        auto out = res->core_chat->respond(state, S.chat, rng);
        response = std::move(out.response);
        trace = std::move(out.trace);
        editorial_used = trace.editorial.has_value();
    }
    if (trace.selected_source.rfind("skill:", 0) == 0 || trace.selected_source == "topic") {
        S.chat.recent_bot.push_back(response);
        while (S.chat.recent_bot.size() > res->config.repetition_window) S.chat.recent_bot.pop_front();
    }

    trace.meta = chat::assess_turn(state, response, editorial_used, res->lexicons.get());
    S.last_meta = trace.meta;

    json subs = json::array();
    for (const auto& sub : ann.rewrite.substitutions) {
        subs.push_back({{"begin", sub.begin}, {"end", sub.end}, {"pronoun", sub.pronoun},
                        {"replacement", sub.replacement}, {"antecedent", sub.antecedent}});
    }
    trace.extra["rewrite"] = {{"query", text},
                              {"qc", state.qc},
                              {"substitutions", subs},
                              {"completion", ann.rewrite.completion.empty() ? json(nullptr)
                                                                            : json(ann.rewrite.completion)}};
    trace.extra["action"] = action.to_json();
    trace.extra["topic_decision"] = topic_j;
    trace.extra["turn"] = turn;
    trace.extra["session_id"] = session_id;
    trace.extra["response"] = response;

    TurnAnnotations a;
    a.e_q = state.e_q;
    a.e_r = state.e_r;
    a.user_entities = ann.rewrite.entities;
    a.bot_entities = empathy.detect_entities(response);
    a.qc = state.qc;
    S.memory = tracker_update(std::move(S.memory), text, response, std::move(a), now);

    TurnLogLine line;
    line.session_id = session_id;
    line.index = turn;
    line.ts_ms = now;
    line.user_text = text;
    line.bot_text = response;
    line.qc = state.qc;
    line.e_q = socialbot::to_json(state.e_q);
    line.e_r = socialbot::to_json(state.e_r);
    line.selected_source = trace.selected_source;
    line.rank_score = trace.rank_score;
    S.log.turns.push_back(line);
    S.traces.push_back(trace.to_json());
    append_log(line);

    reply.response = response;
    reply.turn = turn;
    reply.trace_id = session_id + ":" + std::to_string(turn);
    return reply;
}

void Engine::close_session(const std::string& session_id, CloseReason reason) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    if (session->log.closed) throw SessionClosed("session closed: " + session_id);
    session->log.closed = true;
    session->log.close_reason = reason;
}

std::optional<json> Engine::get_trace(const std::string& session_id, std::size_t turn) const {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    if (turn >= session->traces.size()) return std::nullopt;
    return session->traces[turn];
}

SessionLog Engine::session_log(const std::string& session_id) const {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    return session->log;
}

std::vector<SessionLog> Engine::logs() const {
    std::vector<std::shared_ptr<Session>> all;
    {
        std::lock_guard lock(sessions_mu_);
        for (const auto& id : order_) all.push_back(sessions_.at(id));
    }
    std::vector<SessionLog> out;
    out.reserve(all.size());
    for (const auto& s : all) {
        std::lock_guard lock(s->mu);
        out.push_back(s->log);
    }
    return out;
}

MetricsReport Engine::metrics(const MetricsWindow& window) const {
    return compute_metrics(logs(), window);
}

void Engine::swap_resources(std::shared_ptr<const Resources> next) {
    if (!next) throw std::invalid_argument("swap_resources: null snapshot");
    std::lock_guard lock(resources_mu_);
    resources_ = std::move(next);
}

std::shared_ptr<const Resources> Engine::resources() const {
    std::lock_guard lock(resources_mu_);
    return resources_;
}

void Engine::set_log_file(const std::filesystem::path& path) {
    std::lock_guard lock(log_mu_);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    log_file_ = std::ofstream(path, std::ios::app);
    if (!log_file_) throw DataError("cannot open session log " + path.string());
}

void Engine::append_log(const TurnLogLine& line) {
    std::lock_guard lock(log_mu_);
    if (!log_file_.is_open()) return;
    log_file_ << line.to_json().dump() << '\n';
    log_file_.flush();
}

}  // namespace socialbot::service
