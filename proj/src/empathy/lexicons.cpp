#include "socialbot/empathy/lexicons.hpp"

#include <algorithm>

#include "socialbot/core/empathy_schema.hpp"
#include "socialbot/util/text.hpp"

namespace socialbot::empathy {

namespace {

std::vector<std::string> string_list(const json& rec, const char* plural, const char* singular) {
    std::vector<std::string> out;
    if (rec.contains(plural)) {
        for (const auto& w : rec.at(plural)) out.push_back(w.get<std::string>());
    }
    if (rec.contains(singular)) out.push_back(rec.at(singular).get<std::string>());
    return out;
}

std::size_t sentiment_slot(const std::string& name) {
    auto it = std::find(kSentiments.begin(), kSentiments.end(), name);
    if (it == kSentiments.end()) throw DataError("unknown sentiment class: " + name);
    return static_cast<std::size_t>(it - kSentiments.begin());
}

}  // namespace

Lexicons Lexicons::load(const std::filesystem::path& path) {
    return from_records(load_jsonl(path));
}

Lexicons Lexicons::from_records(const std::vector<json>& records) {
    Lexicons lx;
    std::size_t cue_order = 0;
    std::vector<std::pair<std::size_t, IntentCue>> cues;
    for (const auto& rec : records) {
        const std::string kind = rec.at("kind").get<std::string>();
        if (kind == "sentiment") {
            SentimentWeights w{};
            for (auto& [cls, val] : rec.at("weights").items()) w[sentiment_slot(cls)] = val.get<double>();
            for (const auto& word : string_list(rec, "words", "word")) {
                lx.sentiment_[text::normalize(word)] = w;
            }
        } else if (kind == "opinion") {
            const double polarity = rec.at("polarity").get<double>();
            for (const auto& word : string_list(rec, "words", "word")) {
                lx.opinion_[text::normalize(word)] = polarity;
            }
        } else if (kind == "intent") {
            const std::string intent = rec.at("intent").get<std::string>();
            if (std::find(kIntents.begin(), kIntents.end(), intent) == kIntents.end()) {
                throw DataError("intent cue with unknown act: " + intent);
            }
            IntentCue cue;
            cue.source = rec.at("pattern").get<std::string>();
            cue.pattern = std::regex(cue.source, std::regex::ECMAScript | std::regex::icase);
            cue.intent = intent;
            cue.priority = rec.value("priority", 0);
            cues.emplace_back(cue_order++, std::move(cue));
        } else if (kind == "entity") {
            GazetteerEntry e;
            e.surface = rec.at("surface").get<std::string>();
            e.canonical = rec.value("canonical", e.surface);
            e.type = entity_type_from_string(rec.value("type", "other"));
            e.gender = rec.value("gender", "unknown");
            lx.add_gazetteer(std::move(e));
        } else if (kind == "topic") {
            GazetteerEntry e;
            e.surface = rec.at("name").get<std::string>();
            e.canonical = e.surface;
            e.type = entity_type_from_string(rec.value("type", "other"));
            e.gender = rec.value("gender", "unknown");
            e.is_topic = true;
            lx.declared_topics_.insert(e.canonical);
            lx.add_gazetteer(std::move(e));
        } else if (kind == "pronoun") {
            PronounEntry p;
            p.word = text::normalize(rec.at("word").get<std::string>());
            p.gender = rec.value("gender", "any");
            for (const auto& t : rec.at("types")) p.types.insert(entity_type_from_string(t.get<std::string>()));
            p.demonstrative = rec.value("demonstrative", false);
            p.possessive = rec.value("possessive", false);
            lx.pronouns_[p.word] = std::move(p);
        } else if (kind == "verb") {
            for (const auto& w : string_list(rec, "words", "word")) lx.verbs_.insert(text::normalize(w));
        } else if (kind == "auxiliary") {
            for (const auto& w : string_list(rec, "words", "word")) lx.auxiliaries_.insert(text::normalize(w));
        } else if (kind == "stopword") {
            for (const auto& w : string_list(rec, "words", "word")) lx.stopwords_.insert(text::normalize(w));
        } else if (kind == "function_word") {
            for (const auto& w : string_list(rec, "words", "word")) lx.function_words_.insert(text::normalize(w));
        } else if (kind == "bland") {
            for (const auto& p : string_list(rec, "phrases", "phrase")) lx.bland_.push_back(text::words(p));
        } else if (kind == "blocklist") {
            for (const auto& p : string_list(rec, "terms", "term")) lx.blocklist_.push_back(text::words(p));
        } else {
            throw DataError("unknown lexicon record kind: " + kind);
        }
    }
    std::stable_sort(cues.begin(), cues.end(), [](const auto& a, const auto& b) {
        return a.second.priority > b.second.priority;
    });
    for (auto& [_, cue] : cues) lx.intent_cues_.push_back(std::move(cue));
    return lx;
}

void Lexicons::add_gazetteer(GazetteerEntry e) {
    const auto toks = text::words(e.surface);
    if (toks.empty()) return;
    const std::string key = text::normalize(e.surface);
    for (std::size_t i = 0; i < gazetteer_.size(); ++i) {
        if (text::normalize(gazetteer_[i].surface) == key) {
            if (e.is_topic && !gazetteer_[i].is_topic) {
                gazetteer_[i].is_topic = true;
                if (topic_keys_.insert(key).second) {
                    topics_.push_back(gazetteer_[i].canonical);
                    topic_matcher_.add(toks, topics_.size() - 1);
                }
            }
            return;
        }
    }
    gazetteer_.push_back(e);
    gazetteer_matcher_.add(toks, gazetteer_.size() - 1);
    if (e.is_topic && topic_keys_.insert(key).second) {
        topics_.push_back(e.canonical);
        topic_matcher_.add(toks, topics_.size() - 1);
    }
}

void Lexicons::add_topics(const std::vector<std::string>& names) {
    for (const auto& n : names) {
        GazetteerEntry e;
        e.surface = n;
        e.canonical = n;
        e.is_topic = true;
        add_gazetteer(std::move(e));
    }
}

void Lexicons::validate_topics(const std::set<std::string>& known) const {
    std::set<std::string> known_norm;
    for (const auto& k : known) known_norm.insert(text::normalize(k));
    for (const auto& t : declared_topics_) {
        if (known_norm.count(text::normalize(t)) == 0) {
            throw DataError("topic lexicon entry not in topic DB or KG: " + t);
        }
    }
}

std::vector<std::string> Lexicons::content_words(std::string_view s) const {
    std::vector<std::string> out;
    for (auto& w : text::words(s)) {
        if (!is_stopword(w)) out.push_back(std::move(w));
    }
    return out;
}

}  // namespace socialbot::empathy
