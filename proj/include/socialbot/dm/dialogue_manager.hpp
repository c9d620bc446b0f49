#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "socialbot/chat/core_chat.hpp"
#include "socialbot/core/types.hpp"
#include "socialbot/empathy/empathy.hpp"
#include "socialbot/ml/dual_encoder.hpp"
#include "socialbot/ml/gbrt.hpp"

namespace socialbot::dm {

struct SkillReply {
    std::string text;
    bool terminate = true;
};

/// Low-level policy of a skill. `memory` is the skill's private scratch space,
/// kept for the whole session across activations.
class SkillHandler {
public:
    virtual ~SkillHandler() = default;
    virtual SkillReply handle(const DialogueState& s, json& memory) const = 0;
};

enum class TriggerKind { Keyword, Regex, Classifier };

using TriggerClassifier = std::function<double(const DialogueState&)>;

struct SkillSpec {
    std::string name;
    TriggerKind kind = TriggerKind::Keyword;
    std::vector<std::string> keywords;  // phrases matched on token boundaries
    std::string pattern;                // regex source, case-insensitive
    TriggerClassifier classifier;       // returns a confidence in [0, 1]
    double min_confidence = 0.5;        // classifier triggers fire at or above this
    int priority = 0;
    std::shared_ptr<const SkillHandler> handler;
};

/// Confidence of the skill's trigger on this state, or nullopt when it does
/// not fire. Keyword and regex triggers fire with confidence 1.
std::optional<double> trigger_confidence(const SkillSpec& spec, const DialogueState& s);

class SkillRegistry {
public:
    /// Throws std::invalid_argument for a duplicate or empty name, a missing
    /// handler, or an invalid regex.
    void register_skill(SkillSpec spec);

    const std::vector<SkillSpec>& skills() const { return skills_; }
    const SkillSpec* find(const std::string& name) const;

    /// trigger_confidence of skill `i` using the precompiled trigger.
    std::optional<double> confidence(std::size_t i, const DialogueState& s) const;

private:
    struct Compiled {
        std::regex re;
        std::vector<std::vector<std::string>> phrases;
    };
    std::vector<SkillSpec> skills_;
    std::vector<Compiled> compiled_;
};

struct ActionSelection {
    enum class Kind { CoreChat, Skill };
    Kind kind = Kind::CoreChat;
    std::string skill;
    double confidence = 0.0;
    std::string reason;

    json to_json() const;
    bool operator==(const ActionSelection&) const = default;
};

/// Top-level policy. A running skill keeps control; otherwise the fired
/// trigger with the highest (confidence, priority) wins, earlier
/// registration breaking ties; otherwise Core Chat.
ActionSelection select_action(const DialogueState& s, const std::optional<std::string>& running,
                              const SkillRegistry& registry);

// Shipped skills ---------------------------------------------------------------

class WeatherProvider {
public:
    virtual ~WeatherProvider() = default;
    virtual std::vector<std::string> cities() const = 0;
    virtual std::optional<std::string> forecast(const std::string& city) const = 0;
};

/// Fixed city -> forecast table.
class CannedWeatherProvider final : public WeatherProvider {
public:
    explicit CannedWeatherProvider(std::map<std::string, std::string> table) : table_(std::move(table)) {}
    std::vector<std::string> cities() const override;
    std::optional<std::string> forecast(const std::string& city) const override;

private:
    std::map<std::string, std::string> table_;
};

/// Answers when a known city is named, otherwise asks for one (twice at most).
class WeatherSkill final : public SkillHandler {
public:
    explicit WeatherSkill(std::shared_ptr<const WeatherProvider> provider) : provider_(std::move(provider)) {}
    SkillReply handle(const DialogueState& s, json& memory) const override;

private:
    std::shared_ptr<const WeatherProvider> provider_;
};

/// One-shot reply served in rotation.
class CannedSkill final : public SkillHandler {
public:
    explicit CannedSkill(std::vector<std::string> replies);
    SkillReply handle(const DialogueState& s, json& memory) const override;

private:
    std::vector<std::string> replies_;
};

/// Share of negative-emotion weight in the query, scaled to [0, 1].
double negative_sentiment_confidence(const empathy::EmpathyEngine& engine, const std::string& text);

struct SkillResources {
    std::shared_ptr<const empathy::EmpathyEngine> empathy;
    std::shared_ptr<const WeatherProvider> weather;
};

/// Builds the registry from the config list
/// [{name, trigger: keyword|regex|classifier, keywords|pattern, priority,
///   min_confidence?, handler?: weather|comforting|canned, replies?}].
SkillRegistry registry_from_json(const json& skills, const SkillResources& res);

// Topic manager ----------------------------------------------------------------

struct TopicEntry {
    std::string topic;
    double popularity = 0.0;
    TimestampMs freshness_ms = 0;  // last update of the entry
    double acceptance_rate = 0.0;
    std::vector<std::string> comments;

    static TopicEntry from_json(const json& j);  // throws DataError on an out-of-range rate
    json to_json() const;
};

class TopicDB {
public:
    static TopicDB load(const std::filesystem::path& path);
    explicit TopicDB(std::vector<TopicEntry> entries = {});

    const std::vector<TopicEntry>& entries() const { return entries_; }
    const TopicEntry* find(const std::string& topic) const;
    std::vector<std::string> names() const;
    /// Normalised topic -> popularity, for the related-topic ranker.
    std::map<std::string, double> popularity() const;

private:
    std::vector<TopicEntry> entries_;
    std::map<std::string, std::size_t> by_name_;
};

struct SwitchFeatures {
    bool editorial_used = false;
    bool repeats_input = false;
    bool no_new_info = false;
    bool bland = false;

    std::vector<double> values() const;
    json to_json() const;
};

struct SwitchDecision {
    bool switch_topic = false;
    SwitchFeatures features;
    std::optional<double> model_score;
};

/// Default rule: switch when any indicator is set. With a model, switch
/// when its prediction exceeds 0.5.
SwitchDecision should_switch_topic(const DialogueState& s, const chat::TurnMeta& last_meta,
                                   const empathy::EmpathyEngine& empathy, const ml::GbrtModel* model = nullptr);

/// Topic ranker inputs, in this order.
inline const std::vector<std::string> kTopicFeatures = {"relevance", "freshness", "interests", "popularity",
                                                        "acceptance"};

struct TopicRankerContext {
    const ml::GbrtModel* ranker = nullptr;     // null: default weighting
    const ml::DualEncoder* encoder = nullptr;  // null: bag-of-words cosine
    TimestampMs now_ms = 0;
    double half_life_days = 7.0;
};

struct ScoredTopic {
    const TopicEntry* entry = nullptr;
    std::vector<double> features;
    double score = 0.0;
};

double default_topic_score(const std::vector<double>& features);

std::vector<double> topic_features(const TopicEntry& e, const DialogueState& s, const PersonaProfile* user,
                                   const TopicRankerContext& ctx);

/// Undiscussed topics scored and sorted descending, ties by topic name.
std::vector<ScoredTopic> recommend_topic(const DialogueState& s, const TopicDB& db, const PersonaProfile* user,
                                         const std::set<std::string>& discussed, const TopicRankerContext& ctx);

/// Normalised names of every topic annotated so far in the session.
std::set<std::string> discussed_topics(const WorkingMemory& memory);

}  // namespace socialbot::dm
