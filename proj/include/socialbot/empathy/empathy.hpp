#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "socialbot/core/empathy_schema.hpp"
#include "socialbot/core/types.hpp"
#include "socialbot/empathy/lexicons.hpp"

namespace socialbot::empathy {

/// Topic-manager decision handed to response-empathy derivation.
struct TopicDecision {
    bool switch_topic = false;
    std::string new_topic;

    static TopicDecision keep() { return {}; }
    static TopicDecision switch_to(std::string topic) { return {true, std::move(topic)}; }
};

/// Rules deriving the response empathy values from the query ones.
struct HeuristicTable {
    struct Reaction {
        std::string sentiment;
        std::string opinion;
        std::string style;
    };
    std::map<std::string, Reaction> by_sentiment;
    std::map<std::string, std::string> by_intent;
    Reaction fallback{"neutral", "neutral", "none"};

    static HeuristicTable load(const std::filesystem::path& path);
    static HeuristicTable from_json(const json& j);
};

struct Substitution {
    std::size_t begin = 0;  // byte span in the raw query
    std::size_t end = 0;
    std::string pronoun;
    std::string replacement;
    std::string antecedent;  // surface form of the memory entity
};

struct RewriteResult {
    std::string qc;
    std::vector<EntityMention> entities;
    std::vector<Substitution> substitutions;
    std::string completion;  // predicate prepended by sentence completion, if any
};

struct Annotation {
    DialogueState state;
    RewriteResult rewrite;
};

/// Query rewriting and empathy-vector computation over immutable lexicons.
class EmpathyEngine {
public:
    EmpathyEngine(std::shared_ptr<const Lexicons> lexicons, EmpathySchema schema, HeuristicTable table);

    /// Entity labeling, pronoun resolution against memory, sentence completion.
    RewriteResult contextual_rewrite(const std::string& q, const WorkingMemory& memory) const;

    std::vector<EntityMention> detect_entities(std::string_view text) const;

    EmpathyVector understand_user(const std::string& qc, const WorkingMemory& memory,
                                  const PersonaProfile* user_profile) const;

    EmpathyVector derive_response_empathy(const EmpathyVector& e_q, const PersonaProfile& bot_persona,
                                          const TopicDecision& decision) const;

    Annotation annotate(const std::string& q, const WorkingMemory& memory,
                        const PersonaProfile* user_profile, const PersonaProfile& bot_persona,
                        const TopicDecision& decision) const;

    /// Summed lexicon weight per sentiment class (kSentiments order).
    SentimentWeights sentiment_scores(std::string_view text) const;

    /// Topics found in `text`, longest match, left to right.
    std::vector<std::string> extract_topics(std::string_view text) const;

    /// Whether the text is fully covered by bland phrases ("OK", "I see", ...).
    bool is_bland(std::string_view text) const;

    /// Whether the text contains a blocklisted term.
    bool is_improper(std::string_view text) const;

    const Lexicons& lexicons() const { return *lexicons_; }
    const EmpathySchema& schema() const { return schema_; }
    const HeuristicTable& heuristics() const { return table_; }

private:
    std::string detect_intent(const std::string& qc, const WorkingMemory& memory) const;
    std::string focal_predicate(const std::string& question) const;

    std::shared_ptr<const Lexicons> lexicons_;
    EmpathySchema schema_;
    HeuristicTable table_;
};

}  // namespace socialbot::empathy
