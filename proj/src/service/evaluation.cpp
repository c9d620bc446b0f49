#include "socialbot/service/evaluation.hpp"

#include <random>
#include <set>
#include <stdexcept>

#include "socialbot/util/text.hpp"

namespace socialbot::service {

CoverageQuery CoverageQuery::from_json(const json& j) {
    CoverageQuery q;
    q.query = j.at("query").get<std::string>();
    q.good = j.value("good", std::vector<std::string>{});
    q.acceptable = j.value("acceptable", std::vector<std::string>{});
    return q;
}

std::vector<CoverageQuery> load_coverage_set(const std::filesystem::path& path) {
    std::vector<CoverageQuery> out;
    for (const auto& j : load_jsonl(path)) out.push_back(CoverageQuery::from_json(j));
    return out;
}

int keyword_judge(const CoverageQuery& q, const std::string& response) {
    const auto w = text::words(response);
    auto any = [&](const std::vector<std::string>& phrases) {
        for (const auto& p : phrases) {
            const auto pw = text::words(p);
            if (!pw.empty() && text::contains_phrase(w, pw)) return true;
        }
        return false;
    };
    if (any(q.good)) return 2;
    if (any(q.acceptable)) return 1;
    return 0;
}

json CoverageReport::to_json() const {
    return {{"generators", generators}, {"per_query", per_query}, {"total", total}, {"mean", mean}};
}

CoverageReport response_coverage(const Resources& res, const std::vector<std::string>& generators,
                                 const std::vector<CoverageQuery>& queries, const CoverageJudge& judge) {
    CoverageReport r;
    r.generators = generators;
    const auto gens = res.select_generators(generators);
    for (const auto& q : queries) {
        const WorkingMemory empty;
        const auto ann = res.empathy->annotate(q.query, empty, nullptr, res.bot, empathy::TopicDecision::keep());
        const auto gen = chat::generate_candidates(ann.state, gens);
        std::set<std::string> good;
        for (const auto& c : gen.candidates) {
            const int label = judge(q, c.text);
            if (label < 0 || label > 2) throw std::invalid_argument("coverage judge returned a label outside {0,1,2}");
            if (label >= 1) good.insert(text::normalize(c.text));
        }
        r.per_query.push_back(good.size());
        r.total += good.size();
    }
    if (!queries.empty()) r.mean = static_cast<double>(r.total) / static_cast<double>(queries.size());
    return r;
}

UserScript UserScript::from_json(const json& j) {
    UserScript s;
    s.users = j.value("users", s.users);
    s.max_turns = j.value("max_turns", s.max_turns);
    s.quit_probability = j.value("quit_probability", s.quit_probability);
    s.quit_after_editorial = j.value("quit_after_editorial", s.quit_after_editorial);
    if (j.contains("gap_ms")) {
        const auto& g = j.at("gap_ms");
        if (g.is_array()) {
            s.gap_min_ms = g.at(0).get<TimestampMs>();
            s.gap_max_ms = g.at(1).get<TimestampMs>();
        } else {
            s.gap_min_ms = s.gap_max_ms = g.get<TimestampMs>();
        }
    }
    s.openers = j.value("openers", std::vector<std::string>{});
    s.pool = j.value("pool", std::vector<std::string>{});
    if (s.pool.empty()) throw DataError("user script: empty utterance pool");
    if (s.openers.empty()) s.openers = s.pool;
    if (s.gap_min_ms < 0 || s.gap_max_ms < s.gap_min_ms) throw DataError("user script: bad gap range");
    for (double p : {s.quit_probability, s.quit_after_editorial}) {
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("user script: probabilities must lie in [0, 1]");
    }
    if (s.max_turns == 0) throw DataError("user script: max_turns must be positive");
    return s;
}

UserScript UserScript::load(const std::filesystem::path& path) {
    return from_json(load_json(path));
}

std::vector<SessionLog> simulate_sessions(std::shared_ptr<const Resources> res, const UserScript& script,
                                          std::size_t n, std::uint64_t seed) {
    auto clock = std::make_shared<ManualClock>(kSimulationEpochMs);
    Engine engine(std::move(res), clock);
    std::vector<SessionLog> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 user_rng(text::fnv1a64("user/" + std::to_string(seed) + "/" + std::to_string(i)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<TimestampMs> gap(script.gap_min_ms, script.gap_max_ms);
        std::uniform_int_distribution<std::size_t> pick_pool(0, script.pool.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_opener(0, script.openers.size() - 1);

        // sessions are a day apart so none overlaps the previous one's timeout window
        clock->set(kSimulationEpochMs + static_cast<TimestampMs>(i) * 86'400'000);
        const std::string uid = "sim-user-" + std::to_string(i);
        const std::string sid = engine.create_session({uid, std::nullopt});
        bool open = true;
        for (std::size_t t = 0; t < script.max_turns; ++t) {
            const std::string& text = t == 0 ? script.openers[pick_opener(user_rng)] : script.pool[pick_pool(user_rng)];
            const TimestampMs wait = gap(user_rng);
            const double u = unit(user_rng);
            if (t > 0) clock->advance(wait);
            const ChatReply reply = engine.chat_turn(sid, text);
            if (reply.closed) {
                open = false;
                break;
            }
            const auto trace = engine.get_trace(sid, *reply.turn);
            const bool editorial = trace && trace->value("selected_source", "") == "editorial";
            if (u < (editorial ? script.quit_after_editorial : script.quit_probability)) break;
        }
        if (open) engine.close_session(sid, CloseReason::User);
        out.push_back(engine.session_log(sid));
    }
    return out;
}

json ConfigComparison::to_json() const {
    return {{"cps_a", cps_a}, {"cps_b", cps_b}, {"delta", cps_b - cps_a}, {"sessions", sessions}};
}

ConfigComparison compare_configs(std::shared_ptr<const Resources> a, std::shared_ptr<const Resources> b,
                                 const UserScript& script, std::size_t n, std::uint64_t seed) {
    ConfigComparison c;
    c.sessions = n;
    c.cps_a = compute_cps(simulate_sessions(std::move(a), script, n, seed));
    c.cps_b = compute_cps(simulate_sessions(std::move(b), script, n, seed));
    return c;
}

}  // namespace socialbot::service
