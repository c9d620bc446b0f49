#include "socialbot/dm/dialogue_manager.hpp"

#include <algorithm>
#include <cmath>

#include "socialbot/util/text.hpp"

namespace socialbot::dm {

// Triggers -------------------------------------------------------------------

namespace {

std::optional<double> fire(const SkillSpec& spec, const std::regex* re,
                           const std::vector<std::vector<std::string>>& phrases, const DialogueState& s) {
    switch (spec.kind) {
        case TriggerKind::Keyword: {
            const auto w = text::words(s.qc);
            for (const auto& p : phrases) {
                if (text::contains_phrase(w, p)) return 1.0;
            }
            return std::nullopt;
        }
        case TriggerKind::Regex:
            if (re != nullptr && std::regex_search(s.qc, *re)) return 1.0;
            return std::nullopt;
        case TriggerKind::Classifier: {
            if (!spec.classifier) return std::nullopt;
            const double c = std::clamp(spec.classifier(s), 0.0, 1.0);
            if (c >= spec.min_confidence) return c;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::vector<std::vector<std::string>> phrase_tokens(const std::vector<std::string>& keywords) {
    std::vector<std::vector<std::string>> out;
    for (const auto& k : keywords) {
        auto t = text::words(k);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

std::optional<double> trigger_confidence(const SkillSpec& spec, const DialogueState& s) {
    std::optional<std::regex> re;
    if (spec.kind == TriggerKind::Regex) re.emplace(spec.pattern, std::regex::ECMAScript | std::regex::icase);
    return fire(spec, re ? &*re : nullptr, phrase_tokens(spec.keywords), s);
}

void SkillRegistry::register_skill(SkillSpec spec) {
    if (spec.name.empty()) throw std::invalid_argument("register_skill: empty name");
    if (find(spec.name) != nullptr) throw std::invalid_argument("register_skill: duplicate skill " + spec.name);
    if (!spec.handler) throw std::invalid_argument("register_skill: skill " + spec.name + " has no handler");
    Compiled c;
    if (spec.kind == TriggerKind::Regex) {
        try {
            c.re = std::regex(spec.pattern, std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error& e) {
            throw std::invalid_argument("register_skill: bad pattern for " + spec.name + ": " + e.what());
        }
    }
    if (spec.kind == TriggerKind::Keyword) {
        c.phrases = phrase_tokens(spec.keywords);
        if (c.phrases.empty()) throw std::invalid_argument("register_skill: skill " + spec.name + " has no keywords");
    }
    if (spec.kind == TriggerKind::Classifier && !spec.classifier) {
        throw std::invalid_argument("register_skill: skill " + spec.name + " has no classifier");
    }
    skills_.push_back(std::move(spec));
    compiled_.push_back(std::move(c));
}

const SkillSpec* SkillRegistry::find(const std::string& name) const {
    for (const auto& s : skills_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::optional<double> SkillRegistry::confidence(std::size_t i, const DialogueState& s) const {
    return fire(skills_.at(i), &compiled_.at(i).re, compiled_.at(i).phrases, s);
}

json ActionSelection::to_json() const {
    return json{{"kind", kind == Kind::Skill ? "skill" : "core_chat"},
                {"skill", skill},
                {"confidence", confidence},
                {"reason", reason}};
}

ActionSelection select_action(const DialogueState& s, const std::optional<std::string>& running,
                              const SkillRegistry& registry) {
    ActionSelection a;
    if (running && registry.find(*running) != nullptr) {
        a.kind = ActionSelection::Kind::Skill;
        a.skill = *running;
        a.confidence = 1.0;
        a.reason = "running skill keeps control";
        return a;
    }
    std::optional<std::size_t> best;
    double best_conf = 0.0;
    for (std::size_t i = 0; i < registry.skills().size(); ++i) {
        const auto c = registry.confidence(i, s);
        if (!c) continue;
        const int prio = registry.skills()[i].priority;
        if (!best || *c > best_conf || (*c == best_conf && prio > registry.skills()[*best].priority)) {
            best = i;
            best_conf = *c;
        }
    }
    if (!best) {
        a.reason = "no trigger fired";
        return a;
    }
    a.kind = ActionSelection::Kind::Skill;
    a.skill = registry.skills()[*best].name;
    a.confidence = best_conf;
    a.reason = "triggered";
    return a;
}

// Skills ---------------------------------------------------------------------

std::vector<std::string> CannedWeatherProvider::cities() const {
    std::vector<std::string> out;
    for (const auto& [c, f] : table_) out.push_back(c);
    return out;
}

std::optional<std::string> CannedWeatherProvider::forecast(const std::string& city) const {
    for (const auto& [c, f] : table_) {
        if (text::normalize(c) == text::normalize(city)) return f;
    }
    return std::nullopt;
}

SkillReply WeatherSkill::handle(const DialogueState& s, json& memory) const {
    const auto w = text::words(s.qc);
    // longest city name mentioned wins
    std::string city;
    std::size_t longest = 0;
    for (const auto& c : provider_->cities()) {
        const auto t = text::words(c);
        if (t.size() > longest && text::contains_phrase(w, t)) {
            city = c;
            longest = t.size();
        }
    }
    if (!city.empty()) {
        if (auto f = provider_->forecast(city)) {
            memory.erase("asked");
            return {"The weather in " + city + ": " + *f, true};
        }
    }
    const int asked = memory.value("asked", 0);
    if (asked >= 2) {
        memory.erase("asked");
        return {"Sorry, I could not find the weather for that place.", true};
    }
    memory["asked"] = asked + 1;
    return {"Which city would you like the weather for?", false};
}

CannedSkill::CannedSkill(std::vector<std::string> replies) : replies_(std::move(replies)) {
    if (replies_.empty()) throw std::invalid_argument("CannedSkill: no replies");
}

SkillReply CannedSkill::handle(const DialogueState&, json& memory) const {
    // rotation survives across activations through the session-level counter
    const std::size_t n = memory.value("served", std::size_t{0});
    memory["served"] = n + 1;
    return {replies_[n % replies_.size()], true};
}

double negative_sentiment_confidence(const empathy::EmpathyEngine& engine, const std::string& s) {
    const auto scores = engine.sentiment_scores(s);
    double total = 0.0;
    for (double x : scores) total += std::max(0.0, x);
    if (total <= 0.0) return 0.0;
    const double negative = std::max(0.0, scores[1]) + std::max(0.0, scores[2]) + std::max(0.0, scores[3]);
    // share of negative weight, damped until the evidence reaches two units
    return std::clamp((negative / total) * std::min(1.0, negative / 2.0), 0.0, 1.0);
}

SkillRegistry registry_from_json(const json& skills, const SkillResources& res) {
    SkillRegistry reg;
    for (const auto& j : skills) {
        SkillSpec spec;
        spec.name = j.at("name").get<std::string>();
        const std::string trigger = j.at("trigger").get<std::string>();
        if (trigger == "keyword") {
            spec.kind = TriggerKind::Keyword;
            spec.keywords = j.at("keywords").get<std::vector<std::string>>();
        } else if (trigger == "regex") {
            spec.kind = TriggerKind::Regex;
            spec.pattern = j.at("pattern").get<std::string>();
        } else if (trigger == "classifier") {
            spec.kind = TriggerKind::Classifier;
            const std::string which = j.value("classifier", "negative_sentiment");
            if (which != "negative_sentiment") throw DataError("skill " + spec.name + ": unknown classifier " + which);
            if (!res.empathy) throw DataError("skill " + spec.name + ": classifier needs the empathy engine");
            auto engine = res.empathy;
            spec.classifier = [engine](const DialogueState& s) { return negative_sentiment_confidence(*engine, s.qc); };
        } else {
            throw DataError("skill " + spec.name + ": unknown trigger kind " + trigger);
        }
        spec.priority = j.value("priority", 0);
        spec.min_confidence = j.value("min_confidence", 0.5);
        const std::string handler = j.value("handler", "canned");
        if (handler == "weather") {
            if (!res.weather) throw DataError("skill " + spec.name + ": no weather provider");
            spec.handler = std::make_shared<WeatherSkill>(res.weather);
        } else {
            auto replies = j.value("replies", std::vector<std::string>{});
            if (replies.empty()) replies.push_back("Let me think about that one for a moment.");
            spec.handler = std::make_shared<CannedSkill>(std::move(replies));
        }
        reg.register_skill(std::move(spec));
    }
    return reg;
}

// Topic manager --------------------------------------------------------------

TopicEntry TopicEntry::from_json(const json& j) {
    TopicEntry e;
    e.topic = j.at("topic").get<std::string>();
    if (text::trim(e.topic).empty()) throw DataError("topic entry with empty name");
    e.popularity = j.value("popularity", 0.0);
    e.freshness_ms = j.value("freshness_ms", TimestampMs{0});
    e.acceptance_rate = j.value("acceptance_rate", 0.0);
    if (!(e.acceptance_rate >= 0.0 && e.acceptance_rate <= 1.0)) {
        throw DataError("topic " + e.topic + ": acceptance_rate must lie in [0, 1]");
    }
    e.comments = j.value("comments", std::vector<std::string>{});
    return e;
}

json TopicEntry::to_json() const {
    return json{{"topic", topic},
                {"popularity", popularity},
                {"freshness_ms", freshness_ms},
                {"acceptance_rate", acceptance_rate},
                {"comments", comments}};
}

TopicDB TopicDB::load(const std::filesystem::path& path) {
    std::vector<TopicEntry> entries;
    for (const auto& j : load_jsonl(path)) entries.push_back(TopicEntry::from_json(j));
    return TopicDB(std::move(entries));
}

TopicDB::TopicDB(std::vector<TopicEntry> entries) {
    for (auto& e : entries) {
        const std::string key = text::normalize(e.topic);
        auto it = by_name_.find(key);
        if (it != by_name_.end()) {
            entries_[it->second] = std::move(e);  // later record replaces
        } else {
            by_name_[key] = entries_.size();
            entries_.push_back(std::move(e));
        }
    }
}

const TopicEntry* TopicDB::find(const std::string& topic) const {
    auto it = by_name_.find(text::normalize(topic));
    return it == by_name_.end() ? nullptr : &entries_[it->second];
}

std::vector<std::string> TopicDB::names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.topic);
    return out;
}

std::map<std::string, double> TopicDB::popularity() const {
    std::map<std::string, double> out;
    for (const auto& e : entries_) out[text::normalize(e.topic)] = e.popularity;
    return out;
}

std::vector<double> SwitchFeatures::values() const {
    return {editorial_used ? 1.0 : 0.0, repeats_input ? 1.0 : 0.0, no_new_info ? 1.0 : 0.0, bland ? 1.0 : 0.0};
}

json SwitchFeatures::to_json() const {
    return json{{"editorial_used", editorial_used},
                {"repeats_input", repeats_input},
                {"no_new_info", no_new_info},
                {"bland", bland}};
}

SwitchDecision should_switch_topic(const DialogueState& s, const chat::TurnMeta& last, const empathy::EmpathyEngine& empathy,
                                   const ml::GbrtModel* model) {
    SwitchDecision d;
    d.features.editorial_used = last.editorial_used;
    d.features.repeats_input = last.repeats_input;
    d.features.no_new_info = last.no_new_info;
    d.features.bland = empathy.is_bland(s.query) || empathy.is_bland(s.qc);
    if (model != nullptr) {
        d.model_score = model->predict(d.features.values());
        d.switch_topic = *d.model_score > 0.5;
    } else {
        d.switch_topic = d.features.editorial_used || d.features.repeats_input || d.features.no_new_info ||
                         d.features.bland;
    }
    return d;
}

double default_topic_score(const std::vector<double>& f) {
    return 1.0 * f[0] + 0.5 * f[1] + 0.5 * f[2] + 0.2 * f[3] + 1.0 * f[4];
}

std::vector<double> topic_features(const TopicEntry& e, const DialogueState& s, const PersonaProfile* user,
                                   const TopicRankerContext& ctx) {
    const double relevance =
        ctx.encoder != nullptr ? ctx.encoder->similarity(e.topic, s.qc) : chat::bow_cosine(e.topic, s.qc);
    const double age_days = std::max<double>(0.0, static_cast<double>(ctx.now_ms - e.freshness_ms)) / 86400000.0;
    const double freshness = ctx.half_life_days > 0 ? std::pow(0.5, age_days / ctx.half_life_days) : 1.0;
    double interests = 0.0;
    if (user != nullptr) {
        if (auto it = user->keys.find("interests"); it != user->keys.end() && it->second != "unknown") {
            const auto mine = text::words(it->second);
            const auto topic = text::words(e.topic);
            for (const auto& w : topic) {
                if (std::find(mine.begin(), mine.end(), w) != mine.end()) interests = 1.0;
            }
        }
    }
    return {relevance, freshness, interests, std::log1p(std::max(0.0, e.popularity)), e.acceptance_rate};
}

std::vector<ScoredTopic> recommend_topic(const DialogueState& s, const TopicDB& db, const PersonaProfile* user,
                                         const std::set<std::string>& discussed, const TopicRankerContext& ctx) {
    std::vector<ScoredTopic> out;
    for (const auto& e : db.entries()) {
        if (discussed.count(text::normalize(e.topic)) > 0) continue;
        ScoredTopic t;
        t.entry = &e;
        t.features = topic_features(e, s, user, ctx);
        t.score = ctx.ranker != nullptr ? ctx.ranker->predict(t.features) : default_topic_score(t.features);
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(), [](const ScoredTopic& a, const ScoredTopic& b) {
        return a.score != b.score ? a.score > b.score : a.entry->topic < b.entry->topic;
    });
    return out;
}

std::set<std::string> discussed_topics(const WorkingMemory& memory) {
    std::set<std::string> out;
    for (const auto& t : memory.turns) {
        if (!t.annotations) continue;
        for (const auto* e : {&t.annotations->e_q, &t.annotations->e_r}) {
            const std::string& topic = e->get("topic");
            if (topic != "none" && topic != "unknown") out.insert(text::normalize(topic));
        }
    }
    return out;
}

}  // namespace socialbot::dm
