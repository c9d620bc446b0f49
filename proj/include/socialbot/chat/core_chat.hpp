#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "socialbot/core/candidate.hpp"
#include "socialbot/core/types.hpp"
#include "socialbot/empathy/empathy.hpp"
#include "socialbot/kg/knowledge_graph.hpp"
#include "socialbot/ml/dual_encoder.hpp"
#include "socialbot/ml/gbrt.hpp"
#include "socialbot/nrg/nrg.hpp"
#include "socialbot/retrieval/paired.hpp"

namespace socialbot::chat {

/// Per-source ceilings on generated candidates.
inline constexpr std::size_t kPairedCap = 400;
inline constexpr std::size_t kUnpairedCap = 400;
inline constexpr std::size_t kNeuralCap = 20;

std::size_t source_cap(CandidateSource s);

class CandidateGenerator {
public:
    virtual ~CandidateGenerator() = default;
    virtual CandidateSource source() const = 0;
    virtual std::string name() const = 0;
    virtual std::vector<ResponseCandidate> generate(const DialogueState& s) const = 0;
};

class PairedGenerator final : public CandidateGenerator {
public:
    PairedGenerator(std::shared_ptr<const retrieval::PairedIndex> index, std::shared_ptr<const ml::DualEncoder> encoder,
                    PersonaProfile bot, retrieval::PairedRetrievalParams params = {});
    CandidateSource source() const override { return CandidateSource::Paired; }
    std::string name() const override { return "paired"; }
    std::vector<ResponseCandidate> generate(const DialogueState& s) const override;

private:
    std::shared_ptr<const retrieval::PairedIndex> index_;
    std::shared_ptr<const ml::DualEncoder> encoder_;
    PersonaProfile bot_;
    retrieval::PairedRetrievalParams params_;
};

/// Knowledge-graph expanded retrieval over standalone sentences.
class UnpairedGenerator final : public CandidateGenerator {
public:
    UnpairedGenerator(std::shared_ptr<const kg::UnpairedIndex> index, std::shared_ptr<const kg::KnowledgeGraph> graph,
                      std::shared_ptr<const empathy::Lexicons> lexicons, kg::RelatedTopicContext related,
                      PersonaProfile bot, kg::UnpairedParams params = {});
    CandidateSource source() const override { return CandidateSource::Unpaired; }
    std::string name() const override { return "unpaired"; }
    std::vector<ResponseCandidate> generate(const DialogueState& s) const override;

    /// Topics of qc and their related topics, as used for the expanded query.
    std::pair<std::vector<std::string>, std::vector<std::string>> expansion(const std::string& qc) const;

private:
    std::shared_ptr<const kg::UnpairedIndex> index_;
    std::shared_ptr<const kg::KnowledgeGraph> graph_;
    std::shared_ptr<const empathy::Lexicons> lexicons_;
    kg::RelatedTopicContext related_;
    PersonaProfile bot_;
    kg::UnpairedParams params_;
};

class NeuralGenerator final : public CandidateGenerator {
public:
    NeuralGenerator(std::shared_ptr<const nrg::NrgModel> model, nrg::BeamParams params);
    CandidateSource source() const override { return CandidateSource::Neural; }
    std::string name() const override { return "neural"; }
    std::vector<ResponseCandidate> generate(const DialogueState& s) const override;

private:
    std::shared_ptr<const nrg::NrgModel> model_;
    nrg::BeamParams params_;
};

struct GeneratorFailure {
    std::string generator;
    std::string message;
};

struct GenerationResult {
    std::vector<ResponseCandidate> candidates;
    std::vector<GeneratorFailure> failures;
    std::map<std::string, std::size_t> per_source;  // after caps, before dedup
};

/// Runs every generator, isolates failures, caps each source, and removes
/// duplicate texts (normalised) keeping the paired > unpaired > neural copy.
GenerationResult generate_candidates(const DialogueState& s,
                                     const std::vector<std::shared_ptr<const CandidateGenerator>>& generators);

/// Ranker input names, in order: cohesion, coherence, empathy, retrieval.
const std::vector<std::string>& feature_names();

struct FeatureContext {
    const empathy::EmpathyEngine* empathy = nullptr;
    const ml::DualEncoder* pair_encoder = nullptr;  // null: bag-of-words cosine
    PersonaProfile bot;
    std::size_t context_turns = 3;
};

/// Per-turn precomputation shared by all candidates of the turn.
class FeatureExtractor {
public:
    FeatureExtractor(const FeatureContext& ctx, const DialogueState& s);

    FeatureVector features(const ResponseCandidate& c) const;

    /// Empathy of the candidate read as a reply to qc in the current context.
    EmpathyVector candidate_empathy(const std::string& text) const;

    const std::string& context_text() const { return context_text_; }

private:
    double similarity(const std::string& a, const std::string& b) const;

    const FeatureContext& ctx_;
    const DialogueState& s_;
    WorkingMemory reply_memory_;
    std::string context_text_;
};

/// Cosine of token-count vectors; 0 if either side is empty.
double bow_cosine(const std::string& a, const std::string& b);

/// Share of the content words of `a` that also appear in `b`.
double content_overlap(const std::string& a, const std::string& b, const empathy::Lexicons* lexicons);

class ResponseRanker {
public:
    virtual ~ResponseRanker() = default;
    virtual double score(const FeatureVector& f) const = 0;
    virtual std::string name() const = 0;
};

class GbrtRanker final : public ResponseRanker {
public:
    explicit GbrtRanker(std::shared_ptr<const ml::GbrtModel> model);
    double score(const FeatureVector& f) const override;
    std::string name() const override { return "gbrt"; }

private:
    std::shared_ptr<const ml::GbrtModel> model_;
};

/// Fixed weighting used when no trained ranker is configured; on the 0-2
/// label scale, clamped.
class HeuristicRanker final : public ResponseRanker {
public:
    double score(const FeatureVector& f) const override;
    std::string name() const override { return "heuristic"; }
};

struct RankerConfig {
    std::shared_ptr<const ResponseRanker> ranker;
    double threshold = 1.0;
};

struct Selection {
    bool valid = false;
    std::size_t index = 0;  // into the scored candidate list
    double score = 0.0;
    std::size_t eligible = 0;
};

/// Scores every candidate (writing rank_score) and draws uniformly among
/// those scoring strictly above the threshold.
Selection rank_and_select(std::vector<ResponseCandidate>& candidates, const RankerConfig& config, std::mt19937_64& rng);

enum class EditorialReason { NoCandidate, ModelFailure, Timeout, ImproperInput };

std::string_view to_string(EditorialReason r);

/// Curated fallback replies keyed by reason, served in rotation.
class EditorialSet {
public:
    static EditorialSet load(const std::filesystem::path& path);
    static EditorialSet from_json(const json& j);

    /// Text number `counter` (mod set size) for the reason; advances counter.
    std::string next(EditorialReason r, std::size_t& counter) const;
    const std::vector<std::string>& texts(EditorialReason r) const;

private:
    std::map<EditorialReason, std::vector<std::string>> sets_;
};

/// Indicators the topic manager reads on the following turn.
struct TurnMeta {
    bool editorial_used = false;
    bool repeats_input = false;
    bool no_new_info = false;
};

struct TurnTrace {
    std::string query;
    std::string qc;
    EmpathyVector e_q;
    EmpathyVector e_r;
    std::vector<ResponseCandidate> candidates;  // scored, in generation order
    std::vector<GeneratorFailure> failures;
    std::vector<std::string> suppressed_repeats;
    std::map<std::string, std::size_t> per_source;
    std::optional<std::size_t> selected;
    std::string selected_source = "editorial";
    std::optional<double> rank_score;
    std::optional<EditorialReason> editorial;
    std::string ranker;
    double threshold = 1.0;
    TurnMeta meta;
    json extra = json::object();  // rewrite, action, topic decision (filled by the caller)

    json to_json() const;
};

/// Per-session mutable inputs of a Core Chat turn.
struct ChatSessionState {
    std::deque<std::string> recent_bot;  // newest last
    std::map<EditorialReason, std::size_t> editorial_counters;
};

struct CoreChatConfig {
    std::vector<std::shared_ptr<const CandidateGenerator>> generators;
    FeatureContext features;
    RankerConfig ranker;
    const EditorialSet* editorial = nullptr;
    std::size_t repetition_window = 3;
    double time_budget_ms = 0.0;  // 0 disables the execution-time fallback
};

struct CoreChatResult {
    std::string response;
    TurnTrace trace;
};

/// Generation, ranking, threshold sampling and editorial fallback.
class CoreChat {
public:
    explicit CoreChat(CoreChatConfig config);

    CoreChatResult respond(const DialogueState& s, ChatSessionState& session, std::mt19937_64& rng) const;

    const CoreChatConfig& config() const { return config_; }

private:
    CoreChatConfig config_;
};

/// The topic-manager indicators for a reply given the state it answered.
TurnMeta assess_turn(const DialogueState& s, const std::string& response, bool editorial_used,
                     const empathy::Lexicons* lexicons);

}  // namespace socialbot::chat
