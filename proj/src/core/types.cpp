#include "socialbot/core/types.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "socialbot/util/text.hpp"

namespace socialbot {

TimestampMs SystemClock::now_ms() const {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string_view to_string(EntityType t) {
    switch (t) {
        case EntityType::Person: return "person";
        case EntityType::Place: return "place";
        case EntityType::Work: return "work";
        case EntityType::Food: return "food";
        case EntityType::Organization: return "organization";
        case EntityType::Other: return "other";
    }
    return "other";
}

EntityType entity_type_from_string(std::string_view s) {
    if (s == "person") return EntityType::Person;
    if (s == "place") return EntityType::Place;
    if (s == "work") return EntityType::Work;
    if (s == "food") return EntityType::Food;
    if (s == "organization") return EntityType::Organization;
    return EntityType::Other;
}

const std::string& EmpathyVector::get(const std::string& key) const {
    static const std::string unknown = "unknown";
    auto it = kv.find(key);
    return it == kv.end() ? unknown : it->second;
}

json to_json(const EmpathyVector& e) {
    json j = json::object();
    for (const auto& [k, v] : e.kv) j[k] = v;
    return j;
}

PersonaProfile PersonaProfile::from_json(const json& j) {
    PersonaProfile p;
    p.name = j.value("name", "");
    // persona keys either flat or nested under "keys"
    const json& src = j.contains("keys") && j.at("keys").is_object() ? j.at("keys") : j;
    for (auto key : kPersonaKeys) {
        const std::string k(key);
        if (src.contains(k) && src[k].is_string()) p.keys[k] = src[k].get<std::string>();
    }
    return p;
}

json PersonaProfile::to_json() const {
    json j = json::object();
    j["name"] = name;
    for (const auto& [k, v] : keys) j[k] = v;
    return j;
}

std::string WorkingMemory::last_utterance() const {
    if (turns.empty()) return {};
    const Turn& t = turns.back();
    return t.bot_text.empty() ? t.user_text : t.bot_text;
}

WorkingMemory tracker_update(WorkingMemory memory, const std::string& user_text,
                             const std::string& bot_text, TurnAnnotations annotations,
                             TimestampMs timestamp) {
    if (text::trim(user_text).empty()) throw std::invalid_argument("tracker_update: empty user text");
    if (!memory.turns.empty() && timestamp < memory.turns.back().timestamp) {
        throw std::invalid_argument("tracker_update: timestamp goes backwards");
    }
    const std::size_t index = memory.turns.size();
    auto merge = [&](std::vector<EntityMention>& mentions) {
        for (auto& m : mentions) {
            m.turn_index = index;
            EntityRecord& rec = memory.entities[m.surface];
            rec.canonical = m.canonical;
            rec.type = m.type;
            if (m.gender != "unknown" || rec.gender.empty()) rec.gender = m.gender;
            rec.last_turn = index;
            rec.last_seq = memory.next_seq++;
        }
    };
    merge(annotations.user_entities);
    merge(annotations.bot_entities);

    Turn turn;
    turn.index = index;
    turn.user_text = user_text;
    turn.bot_text = bot_text;
    turn.timestamp = timestamp;
    turn.annotations = std::make_shared<const TurnAnnotations>(std::move(annotations));
    memory.turns.push_back(std::move(turn));
    return memory;
}

namespace {

bool same_turns(const WorkingMemory& a, const WorkingMemory& b) {
    if (a.turns.size() != b.turns.size() || a.entities != b.entities ||
        a.session_start != b.session_start) {
        return false;
    }
    for (std::size_t i = 0; i < a.turns.size(); ++i) {
        const Turn& x = a.turns[i];
        const Turn& y = b.turns[i];
        if (x.index != y.index || x.user_text != y.user_text || x.bot_text != y.bot_text ||
            x.timestamp != y.timestamp) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool DialogueState::operator==(const DialogueState& other) const {
    if (query != other.query || qc != other.qc || e_q != other.e_q || e_r != other.e_r) {
        return false;
    }
    if (!context || !other.context) return context == other.context;
    return same_turns(*context, *other.context);
}

DialogueState encode_state(const WorkingMemory& memory, std::string query, std::string qc,
                           EmpathyVector e_q, EmpathyVector e_r) {
    DialogueState s;
    s.query = std::move(query);
    s.qc = std::move(qc);
    s.context = std::make_shared<const WorkingMemory>(memory);
    s.e_q = std::move(e_q);
    s.e_r = std::move(e_r);
    return s;
}

std::string SessionIdGenerator::next() {
    const auto n = ++counter_;
    char buf[32];
    std::snprintf(buf, sizeof buf, "-%06llu", static_cast<unsigned long long>(n));
    return prefix_ + buf;
}

}  // namespace socialbot
