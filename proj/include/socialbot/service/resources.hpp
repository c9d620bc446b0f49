#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "socialbot/chat/core_chat.hpp"
#include "socialbot/dm/dialogue_manager.hpp"
#include "socialbot/retrieval/filter.hpp"
#include "socialbot/service/config.hpp"
#include "socialbot/service/ingest.hpp"

namespace socialbot::service {

/// Immutable snapshot of everything a turn reads: lexicons, indexes, graph,
/// models and the assembled Core Chat. Sessions hold a shared_ptr to the
/// snapshot they started a turn with, so a reload never tears a turn.
struct Resources {
    EngineConfig config;
    PersonaProfile bot;

    std::shared_ptr<const empathy::Lexicons> lexicons;
    std::shared_ptr<const empathy::EmpathyEngine> empathy;
    std::shared_ptr<const retrieval::FilterRules> filters;
    std::shared_ptr<const chat::EditorialSet> editorial;
    std::shared_ptr<const dm::TopicDB> topics;
    std::shared_ptr<const dm::SkillRegistry> skills;
    std::map<std::string, double> popularity;

    std::shared_ptr<const ml::DualEncoder> encoder;  // may be null
    std::shared_ptr<const retrieval::PairedIndex> paired;
    std::shared_ptr<const kg::KnowledgeGraph> graph;
    std::shared_ptr<const kg::UnpairedIndex> unpaired;
    std::shared_ptr<const nrg::NrgModel> nrg;  // may be null: neural generator left out

    std::shared_ptr<const ml::GbrtModel> ranker_model;   // null: heuristic ranker
    std::shared_ptr<const ml::GbrtModel> switch_model;   // null: default switch rule
    std::shared_ptr<const ml::GbrtModel> topic_model;    // null: default topic weighting
    std::shared_ptr<const ml::GbrtModel> related_model;  // null: default related-topic weighting

    std::map<std::string, std::shared_ptr<const chat::CandidateGenerator>> generators;  // by name
    std::shared_ptr<const chat::CoreChat> core_chat;

    std::map<std::string, IngestStats> ingest;  // what was built in memory at load
    std::vector<std::string> notes;             // fallbacks taken while loading

    /// Loads persisted artifacts where present and builds the rest in memory.
    static std::shared_ptr<const Resources> load(const EngineConfig& config);

    /// Generators by name, in the given order; unknown or unavailable names are skipped.
    std::vector<std::shared_ptr<const chat::CandidateGenerator>> select_generators(
        const std::vector<std::string>& names) const;

    /// A Core Chat over a subset of the generators, sharing everything else.
    std::shared_ptr<const chat::CoreChat> make_core_chat(const std::vector<std::string>& generator_names) const;

    kg::RelatedTopicContext related_context() const;
    dm::TopicRankerContext topic_context(TimestampMs now) const;
};

/// Shared preprocessing behind Resources::load and the CLI build commands.
struct Foundation {
    PersonaProfile bot;
    retrieval::FilterRules filters;
    std::shared_ptr<empathy::Lexicons> lexicons;
    dm::TopicDB topics;
    std::shared_ptr<const kg::KnowledgeGraph> graph;
    EmpathySchema schema;
    std::shared_ptr<const empathy::EmpathyEngine> empathy;
    std::vector<retrieval::RawPair> raw_pairs;  // filtered, empty unless needed
    IngestStats pair_stats;
    std::vector<std::string> notes;
};

/// Loads the persona, filters, lexicons and topic DB, then the KG (building it
/// from the conversation corpus when no graph file exists), and finally the
/// empathy schema over lexicon, topic DB and graph topics.
Foundation load_foundation(const EngineConfig& config, bool force_rebuild_graph = false);

/// Stored pairs: the store file if present, else the raw corpus ingested now.
std::vector<retrieval::PairedRecord> paired_records(const EngineConfig& config, Foundation& f, IngestStats* stats);
std::vector<kg::UnpairedRecord> unpaired_records(const EngineConfig& config, const Foundation& f, IngestStats* stats);

}  // namespace socialbot::service
