#include "socialbot/empathy/empathy.hpp"

#include <algorithm>
#include <cmath>

#include "socialbot/util/text.hpp"

namespace socialbot::empathy {

HeuristicTable HeuristicTable::load(const std::filesystem::path& path) {
    return from_json(load_json(path));
}

HeuristicTable HeuristicTable::from_json(const json& j) {
    HeuristicTable t;
    auto reaction = [](const json& r) {
        return Reaction{r.value("sentiment", "neutral"), r.value("opinion", "neutral"),
                        r.value("style", "none")};
    };
    if (j.contains("sentiment")) {
        for (auto& [k, v] : j.at("sentiment").items()) t.by_sentiment[k] = reaction(v);
    }
    if (j.contains("intent")) {
        for (auto& [k, v] : j.at("intent").items()) t.by_intent[k] = v.get<std::string>();
    }
    if (j.contains("fallback")) t.fallback = reaction(j.at("fallback"));
    return t;
}

EmpathyEngine::EmpathyEngine(std::shared_ptr<const Lexicons> lexicons, EmpathySchema schema,
                             HeuristicTable table)
    : lexicons_(std::move(lexicons)), schema_(std::move(schema)), table_(std::move(table)) {}

std::vector<EntityMention> EmpathyEngine::detect_entities(std::string_view s) const {
    const auto toks = text::tokenize(s);
    std::vector<std::string> words;
    words.reserve(toks.size());
    for (const auto& t : toks) words.push_back(t.text);
    std::vector<EntityMention> out;
    for (const auto& m : lexicons_->gazetteer_matcher().match(words)) {
        const GazetteerEntry& g = lexicons_->gazetteer()[m.id];
        EntityMention em;
        em.begin = toks[m.first].begin;
        em.end = toks[m.last - 1].end;
        em.surface = g.surface;
        em.canonical = g.canonical;
        em.type = g.type;
        em.gender = g.gender;
        out.push_back(std::move(em));
    }
    return out;
}

std::string EmpathyEngine::focal_predicate(const std::string& question) const {
    // last sentence of the question
    std::size_t start = 0;
    const std::string body = text::trim(question);
    for (std::size_t i = 0; i + 1 < body.size(); ++i) {
        if (body[i] == '.' || body[i] == '!' || body[i] == '?') start = i + 1;
    }
    const std::string sentence = body.substr(start);
    const auto toks = text::tokenize(sentence);
    std::ptrdiff_t verb = -1;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (lexicons_->is_verb(toks[i].text) && !lexicons_->is_auxiliary(toks[i].text)) {
            verb = static_cast<std::ptrdiff_t>(i);
        }
    }
    if (verb < 0) return {};
    const std::size_t from = toks[static_cast<std::size_t>(verb)].begin;
    std::size_t to = toks.back().end;
    for (const auto& m : detect_entities(sentence)) {
        if (m.begin > from) {
            to = m.end;
            break;
        }
    }
    return sentence.substr(from, to - from);
}

RewriteResult EmpathyEngine::contextual_rewrite(const std::string& q, const WorkingMemory& memory) const {
    RewriteResult out;
    const auto toks = text::tokenize(q);
    out.entities = detect_entities(q);
    const std::size_t turn_index = memory.turns.size();
    for (auto& m : out.entities) m.turn_index = turn_index;

    auto inside_mention = [&](const text::Token& t) {
        return std::any_of(out.entities.begin(), out.entities.end(),
                           [&](const EntityMention& m) { return t.begin >= m.begin && t.end <= m.end; });
    };

    std::vector<EntityMention> resolved;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        auto pit = lexicons_->pronouns().find(toks[i].text);
        if (pit == lexicons_->pronouns().end() || inside_mention(toks[i])) continue;
        const PronounEntry& p = pit->second;
        if (p.demonstrative && i + 1 < toks.size() && !lexicons_->is_function_word(toks[i + 1].text)) {
            continue;  // determiner use: "that song"
        }
        const std::pair<const std::string, EntityRecord>* best = nullptr;
        for (const auto& entry : memory.entities) {
            const EntityRecord& e = entry.second;
            if (p.types.count(e.type) == 0) continue;
            if (p.gender != "any" && e.gender != "unknown" && e.gender != p.gender) continue;
            if (best == nullptr ||
                std::tie(e.last_turn, e.last_seq) > std::tie(best->second.last_turn, best->second.last_seq)) {
                best = &entry;
            }
        }
        if (best == nullptr) continue;
        Substitution sub;
        sub.begin = toks[i].begin;
        sub.end = toks[i].end;
        sub.pronoun = q.substr(sub.begin, sub.end - sub.begin);
        sub.replacement = best->second.canonical + (p.possessive ? "'s" : "");
        sub.antecedent = best->first;
        out.substitutions.push_back(sub);

        EntityMention m;
        m.surface = best->first;
        m.canonical = best->second.canonical;
        m.type = best->second.type;
        m.gender = best->second.gender;
        m.turn_index = turn_index;
        m.begin = sub.begin;
        m.end = sub.end;
        resolved.push_back(std::move(m));
    }
    out.entities.insert(out.entities.end(), resolved.begin(), resolved.end());
    std::sort(out.entities.begin(), out.entities.end(),
              [](const EntityMention& a, const EntityMention& b) { return a.begin < b.begin; });

    std::string qc = q;
    for (auto it = out.substitutions.rbegin(); it != out.substitutions.rend(); ++it) {
        qc.replace(it->begin, it->end - it->begin, it->replacement);
    }

    const bool has_verb = std::any_of(toks.begin(), toks.end(), [&](const text::Token& t) {
        return lexicons_->is_verb(t.text) || lexicons_->is_auxiliary(t.text);
    });
    if (!has_verb && !toks.empty() && !memory.turns.empty()) {
        const std::string prev = text::trim(memory.turns.back().bot_text);
        if (!prev.empty() && prev.back() == '?') {
            out.completion = focal_predicate(prev);
            if (!out.completion.empty()) qc = out.completion + " " + qc;
        }
    }
    out.qc = std::move(qc);
    return out;
}

SentimentWeights EmpathyEngine::sentiment_scores(std::string_view s) const {
    SentimentWeights total{};
    for (const auto& w : text::words(s)) {
        auto it = lexicons_->sentiment().find(w);
        if (it == lexicons_->sentiment().end()) continue;
        for (std::size_t c = 0; c < total.size(); ++c) total[c] += it->second[c];
    }
    return total;
}

std::vector<std::string> EmpathyEngine::extract_topics(std::string_view s) const {
    std::vector<std::string> out;
    for (const auto& m : lexicons_->topic_matcher().match(text::words(s))) {
        const std::string& t = lexicons_->topics()[m.id];
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
    return out;
}

bool EmpathyEngine::is_bland(std::string_view s) const {
    const auto w = text::words(s);
    if (w.empty()) return false;
    // segmentation of the whole input into bland phrases
    std::vector<bool> reach(w.size() + 1, false);
    reach[0] = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!reach[i]) continue;
        for (const auto& phrase : lexicons_->bland_phrases()) {
            if (phrase.empty() || i + phrase.size() > w.size()) continue;
            if (std::equal(phrase.begin(), phrase.end(), w.begin() + static_cast<std::ptrdiff_t>(i))) {
                reach[i + phrase.size()] = true;
            }
        }
    }
    return reach[w.size()];
}

bool EmpathyEngine::is_improper(std::string_view s) const {
    const auto w = text::words(s);
    return std::any_of(lexicons_->blocklist().begin(), lexicons_->blocklist().end(),
                       [&](const auto& term) { return text::contains_phrase(w, term); });
}

std::string EmpathyEngine::detect_intent(const std::string& qc, const WorkingMemory& memory) const {
    for (const auto& cue : lexicons_->intent_cues()) {
        if (std::regex_search(qc, cue.pattern)) return cue.intent;
    }
    const std::string body = text::trim(qc);
    if (!body.empty() && body.back() == '?') return "question";
    const std::string prev = text::trim(memory.last_utterance());
    if (!prev.empty() && prev.back() == '?') return "answer";
    return "inform";
}

EmpathyVector EmpathyEngine::understand_user(const std::string& qc, const WorkingMemory& memory,
                                             const PersonaProfile* user_profile) const {
    std::map<std::string, std::string> kv;

    std::string previous_topic = "none";
    std::string previous_sentiment;
    if (!memory.turns.empty() && memory.turns.back().annotations) {
        const auto& a = *memory.turns.back().annotations;
        previous_topic = a.e_r.get("topic");
        if (previous_topic == "unknown" || previous_topic == "none") previous_topic = a.e_q.get("topic");
        if (previous_topic == "unknown") previous_topic = "none";
        previous_sentiment = a.e_q.get("sentiment");
    }
    const auto topics = extract_topics(qc);
    std::string topic = previous_topic;
    if (!topics.empty() &&
        std::find(topics.begin(), topics.end(), previous_topic) == topics.end()) {
        topic = topics.front();
    }
    kv["topic"] = topic;
    kv["topic_shift"] = (previous_topic != "none" && topic != previous_topic) ? "true" : "false";

    kv["intent"] = detect_intent(qc, memory);

    const SentimentWeights scores = sentiment_scores(qc);
    std::size_t best = 4;  // neutral
    double best_score = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (scores[c] > best_score) {
            best_score = scores[c];
            best = c;
        }
    }
    const std::string sentiment = kSentiments[best];
    kv["sentiment"] = sentiment;
    kv["sentiment_change"] =
        (!previous_sentiment.empty() && previous_sentiment != "unknown" && previous_sentiment != sentiment)
            ? "true"
            : "false";

    double polarity = 0.0;
    for (const auto& w : text::words(qc)) {
        if (auto it = lexicons_->opinion().find(w); it != lexicons_->opinion().end()) polarity += it->second;
    }
    std::string opinion = "neutral";
    if (polarity > 0) {
        opinion = "positive";
    } else if (polarity < 0) {
        opinion = "negative";
    } else if (sentiment == "happy") {
        opinion = "positive";
    } else if (sentiment == "sad" || sentiment == "angry" || sentiment == "fearful") {
        opinion = "negative";
    }
    kv["opinion"] = opinion;
    kv["style"] = "none";

    for (auto key : kPersonaKeys) {
        const std::string k(key);
        std::string v = "unknown";
        if (user_profile != nullptr) {
            if (auto it = user_profile->keys.find(k); it != user_profile->keys.end()) v = it->second;
        }
        kv[k] = v;
    }
    return schema_.make(std::move(kv));
}

EmpathyVector EmpathyEngine::derive_response_empathy(const EmpathyVector& e_q,
                                                     const PersonaProfile& bot_persona,
                                                     const TopicDecision& decision) const {
    std::map<std::string, std::string> kv;
    kv["topic"] = decision.switch_topic ? decision.new_topic : e_q.get("topic");
    if (kv["topic"] == "unknown") kv["topic"] = "none";
    kv["topic_shift"] = decision.switch_topic ? "true" : "false";

    const std::string& intent = e_q.get("intent");
    if (auto it = table_.by_intent.find(intent); it != table_.by_intent.end()) {
        kv["intent"] = it->second;
    } else {
        kv["intent"] = "inform";
    }
    const HeuristicTable::Reaction* r = &table_.fallback;
    if (auto it = table_.by_sentiment.find(e_q.get("sentiment")); it != table_.by_sentiment.end()) {
        r = &it->second;
    }
    kv["sentiment"] = r->sentiment;
    kv["opinion"] = r->opinion;
    kv["style"] = r->style;
    kv["sentiment_change"] = "false";
    for (auto key : kPersonaKeys) {
        const std::string k(key);
        auto it = bot_persona.keys.find(k);
        kv[k] = it == bot_persona.keys.end() ? "unknown" : it->second;
    }
    return schema_.make(std::move(kv));
}

Annotation EmpathyEngine::annotate(const std::string& q, const WorkingMemory& memory,
                                   const PersonaProfile* user_profile, const PersonaProfile& bot_persona,
                                   const TopicDecision& decision) const {
    Annotation a;
    a.rewrite = contextual_rewrite(q, memory);
    EmpathyVector e_q = understand_user(a.rewrite.qc, memory, user_profile);
    EmpathyVector e_r = derive_response_empathy(e_q, bot_persona, decision);
    a.state = encode_state(memory, q, a.rewrite.qc, std::move(e_q), std::move(e_r));
    return a;
}

}  // namespace socialbot::empathy
