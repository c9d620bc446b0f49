#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socialbot/util/jsonl.hpp"

namespace socialbot {

using TimestampMs = std::int64_t;

/// Injectable time source; the session timeout is evaluated against it.
class Clock {
public:
    virtual ~Clock() = default;
    virtual TimestampMs now_ms() const = 0;
};

class SystemClock final : public Clock {
public:
    TimestampMs now_ms() const override;
};

class ManualClock final : public Clock {
public:
    explicit ManualClock(TimestampMs start = 0) : now_(start) {}
    TimestampMs now_ms() const override { return now_.load(); }
    void set(TimestampMs t) { now_.store(t); }
    void advance(TimestampMs delta) { now_.fetch_add(delta); }

private:
    std::atomic<TimestampMs> now_;
};

enum class EntityType { Person, Place, Work, Food, Organization, Other };

std::string_view to_string(EntityType t);
EntityType entity_type_from_string(std::string_view s);  // unknown names map to Other

struct EntityMention {
    std::string surface;
    std::string canonical;
    EntityType type = EntityType::Other;
    std::string gender = "unknown";
    std::size_t turn_index = 0;
    std::size_t begin = 0;  // byte span in the text it was found in
    std::size_t end = 0;
};

/// Key-value empathy annotation with its dense encoding. `dense` is always
/// produced by EmpathySchema::encode(kv); see empathy_schema.hpp.
struct EmpathyVector {
    std::map<std::string, std::string> kv;
    std::vector<double> dense;

    /// Value for `key`, or "unknown" when absent.
    const std::string& get(const std::string& key) const;
    bool operator==(const EmpathyVector&) const = default;
};

json to_json(const EmpathyVector& e);  // the kv map only

/// Persona keys shared by user and bot profiles.
inline constexpr std::string_view kPersonaKeys[] = {"gender", "age", "interests", "occupation",
                                                    "personality"};

struct PersonaProfile {
    std::string name;
    std::map<std::string, std::string> keys;

    static PersonaProfile from_json(const json& j);
    json to_json() const;
    bool operator==(const PersonaProfile&) const = default;
};

struct TurnAnnotations {
    EmpathyVector e_q;
    EmpathyVector e_r;
    std::vector<EntityMention> user_entities;
    std::vector<EntityMention> bot_entities;
    std::string qc;
};

struct Turn {
    std::size_t index = 0;
    std::string user_text;
    std::string bot_text;
    TimestampMs timestamp = 0;
    std::shared_ptr<const TurnAnnotations> annotations;
};

struct EntityRecord {
    std::string canonical;
    EntityType type = EntityType::Other;
    std::string gender = "unknown";
    std::size_t last_turn = 0;
    std::uint64_t last_seq = 0;  // global mention order; breaks same-turn ties

    bool operator==(const EntityRecord&) const = default;
};

struct WorkingMemory {
    std::vector<Turn> turns;
    std::map<std::string, EntityRecord> entities;  // keyed by surface form
    TimestampMs session_start = 0;
    std::uint64_t next_seq = 0;

    /// Text of the most recent utterance by either side, or empty.
    std::string last_utterance() const;
};

/// Appends one turn (user message + bot reply) and merges the detected
/// entities. Throws std::invalid_argument for an empty user message or a
/// timestamp earlier than the previous turn.
WorkingMemory tracker_update(WorkingMemory memory, const std::string& user_text,
                             const std::string& bot_text, TurnAnnotations annotations,
                             TimestampMs timestamp);

/// The tuple (qc, context, e_q, e_r) consumed by the policy and generators.
struct DialogueState {
    std::string query;  // raw user text
    std::string qc;     // contextual query
    std::shared_ptr<const WorkingMemory> context;
    EmpathyVector e_q;
    EmpathyVector e_r;

    bool operator==(const DialogueState& other) const;
};

DialogueState encode_state(const WorkingMemory& memory, std::string query, std::string qc,
                           EmpathyVector e_q, EmpathyVector e_r);

/// Produces distinct, deterministic session ids ("s-000001", ...) per instance.
class SessionIdGenerator {
public:
    explicit SessionIdGenerator(std::string prefix = "s") : prefix_(std::move(prefix)) {}
    std::string next();

private:
    std::string prefix_;
    std::atomic<std::uint64_t> counter_{0};
};

}  // namespace socialbot
