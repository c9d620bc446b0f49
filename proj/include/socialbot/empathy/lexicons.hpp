#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "socialbot/core/types.hpp"
#include "socialbot/util/phrase_matcher.hpp"

namespace socialbot::empathy {

struct PronounEntry {
    std::string word;
    std::string gender = "any";  // male | female | any
    std::set<EntityType> types;
    bool demonstrative = false;  // "that", "this", "it": only standalone uses resolve
    bool possessive = false;     // replaced by "<entity>'s"
};

struct IntentCue {
    std::string source;
    std::regex pattern;
    std::string intent;
    int priority = 0;
};

struct GazetteerEntry {
    std::string surface;
    std::string canonical;
    EntityType type = EntityType::Other;
    std::string gender = "unknown";
    bool is_topic = false;
};

/// Weights per sentiment class, in kSentiments order.
using SentimentWeights = std::array<double, 5>;

/// Immutable word lists and cue patterns behind the rule-based classifiers.
/// Loaded from one line-delimited JSON file whose records carry a "kind".
class Lexicons {
public:
    static Lexicons load(const std::filesystem::path& path);
    static Lexicons from_records(const std::vector<json>& records);

    /// Adds topic names (topic DB entries, KG nodes) to the topic lexicon.
    void add_topics(const std::vector<std::string>& names);

    /// Throws DataError if an explicitly declared topic is absent from `known`.
    void validate_topics(const std::set<std::string>& known) const;

    const std::map<std::string, SentimentWeights>& sentiment() const { return sentiment_; }
    const std::map<std::string, double>& opinion() const { return opinion_; }
    const std::vector<IntentCue>& intent_cues() const { return intent_cues_; }
    const std::map<std::string, PronounEntry>& pronouns() const { return pronouns_; }
    const std::vector<GazetteerEntry>& gazetteer() const { return gazetteer_; }
    const text::PhraseMatcher& gazetteer_matcher() const { return gazetteer_matcher_; }
    const text::PhraseMatcher& topic_matcher() const { return topic_matcher_; }
    const std::vector<std::string>& topics() const { return topics_; }
    const std::set<std::string>& declared_topics() const { return declared_topics_; }

    bool is_verb(const std::string& w) const { return verbs_.count(w) > 0; }
    bool is_auxiliary(const std::string& w) const { return auxiliaries_.count(w) > 0; }
    bool is_stopword(const std::string& w) const { return stopwords_.count(w) > 0; }
    bool is_function_word(const std::string& w) const { return function_words_.count(w) > 0; }
    const std::vector<std::vector<std::string>>& bland_phrases() const { return bland_; }
    const std::vector<std::vector<std::string>>& blocklist() const { return blocklist_; }

    /// Tokens of `text` that are not stopwords.
    std::vector<std::string> content_words(std::string_view text) const;

private:
    void add_gazetteer(GazetteerEntry e);

    std::map<std::string, SentimentWeights> sentiment_;
    std::map<std::string, double> opinion_;
    std::vector<IntentCue> intent_cues_;
    std::map<std::string, PronounEntry> pronouns_;
    std::vector<GazetteerEntry> gazetteer_;
    text::PhraseMatcher gazetteer_matcher_;
    text::PhraseMatcher topic_matcher_;
    std::vector<std::string> topics_;
    std::set<std::string> topic_keys_;  // normalized names
    std::set<std::string> declared_topics_;
    std::set<std::string> verbs_;
    std::set<std::string> auxiliaries_;
    std::set<std::string> stopwords_;
    std::set<std::string> function_words_;
    std::vector<std::vector<std::string>> bland_;
    std::vector<std::vector<std::string>> blocklist_;
};

}  // namespace socialbot::empathy
