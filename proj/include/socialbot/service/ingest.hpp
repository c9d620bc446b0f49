#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "socialbot/empathy/empathy.hpp"
#include "socialbot/kg/knowledge_graph.hpp"
#include "socialbot/retrieval/filter.hpp"
#include "socialbot/retrieval/paired.hpp"

namespace socialbot::service {

enum class CorpusKind { Paired, Unpaired, Triples, Topics, Lexicons };

CorpusKind corpus_kind_from_string(std::string_view s);  // throws std::invalid_argument
std::string_view to_string(CorpusKind k);

/// Share of malformed lines above which ingestion aborts.
inline constexpr double kMaxMalformedShare = 0.10;

struct IngestStats {
    std::size_t lines = 0;
    std::size_t kept = 0;
    std::size_t replaced = 0;  // records whose content hash was already stored
    std::map<std::string, std::size_t> dropped;  // reason -> count
    std::vector<MalformedLine> malformed;

    std::size_t dropped_total() const;
    json to_json() const;
};

/// Throws DataError when more than kMaxMalformedShare of the lines are malformed.
void check_malformed(const IngestStats& stats, const std::filesystem::path& path);

/// Raw pairs that pass the data-quality filter, in file order.
std::vector<retrieval::RawPair> read_filtered_pairs(const std::filesystem::path& path,
                                                    const retrieval::FilterRules& rules, const PersonaProfile& bot,
                                                    IngestStats& stats);

struct RawSentence {
    std::string text;
    json meta = json::object();
};

std::vector<RawSentence> read_filtered_sentences(const std::filesystem::path& path,
                                                 const retrieval::FilterRules& rules, const PersonaProfile& bot,
                                                 IngestStats& stats);

/// Annotates a raw pair: qc from the pair's context, e_q from the asker
/// profile in meta, e_r read as a reply with the responder profile.
retrieval::PairedRecord annotate_pair(const retrieval::RawPair& raw, const empathy::EmpathyEngine& engine);

kg::UnpairedRecord annotate_sentence(const RawSentence& raw, const empathy::EmpathyEngine& engine);

/// Upserts by content id: an existing id is replaced in place, a new one appended.
void upsert(std::vector<retrieval::PairedRecord>& store, retrieval::PairedRecord rec, IngestStats& stats);
void upsert(std::vector<kg::UnpairedRecord>& store, kg::UnpairedRecord rec, IngestStats& stats);

std::vector<retrieval::PairedRecord> load_paired_store(const std::filesystem::path& path, const EmpathySchema& schema);
void save_paired_store(const std::filesystem::path& path, const std::vector<retrieval::PairedRecord>& records);
std::vector<kg::UnpairedRecord> load_unpaired_store(const std::filesystem::path& path, const EmpathySchema& schema);
void save_unpaired_store(const std::filesystem::path& path, const std::vector<kg::UnpairedRecord>& records);

/// Query and response text of each pair, the unit of KG co-occurrence.
std::vector<std::string> conversation_texts(const std::vector<retrieval::RawPair>& pairs);
std::vector<std::string> conversation_texts(const std::vector<retrieval::PairedRecord>& records);

}  // namespace socialbot::service
