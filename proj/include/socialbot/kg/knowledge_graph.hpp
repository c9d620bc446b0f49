#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "socialbot/core/candidate.hpp"
#include "socialbot/core/empathy_schema.hpp"
#include "socialbot/empathy/lexicons.hpp"
#include "socialbot/ml/dual_encoder.hpp"
#include "socialbot/ml/gbrt.hpp"
#include "socialbot/retrieval/inverted_index.hpp"

namespace socialbot::kg {

struct KgTriple {
    std::string head;
    std::string relation;
    std::string tail;
    bool operator==(const KgTriple&) const = default;
    auto operator<=>(const KgTriple&) const = default;
};

/// Tab-separated head, relation, tail per line. Blank and '#' lines are
/// skipped; lines without exactly three non-empty fields are malformed.
std::vector<KgTriple> load_triples(const std::filesystem::path& path,
                                   std::vector<MalformedLine>* malformed = nullptr);

struct Neighbor {
    std::string topic;
    std::size_t cooccurrence = 0;  // records mentioning both ends
    std::size_t edges = 0;         // retained triples joining the two
    double relation_frequency = 0.0;  // share of retained triples using this edge's commonest relation
};

struct KgBuildStats {
    std::size_t source_triples = 0;
    std::size_t retained = 0;
    std::size_t threshold = 0;
};

/// Triples kept only when head and tail co-occur in at least `threshold`
/// conversation records (query and response text of one record).
class KnowledgeGraph {
public:
    static KnowledgeGraph build(const std::vector<KgTriple>& source, const std::vector<std::string>& conversations,
                                std::size_t threshold, KgBuildStats* stats = nullptr);

    const std::vector<KgTriple>& triples() const { return triples_; }
    /// Neighbours of `topic` (matched after normalisation), sorted by name.
    const std::vector<Neighbor>& neighbors(const std::string& topic) const;
    std::vector<std::string> nodes() const;
    bool contains(const std::string& topic) const;

    json to_json() const;
    static KnowledgeGraph from_json(const json& j);
    void save(const std::filesystem::path& path) const;
    static KnowledgeGraph load(const std::filesystem::path& path);

private:
    void index_adjacency(const std::map<std::pair<std::string, std::string>, std::size_t>& cooc);

    std::vector<KgTriple> triples_;
    std::map<std::string, std::string> display_;             // normalised -> first seen surface
    std::map<std::string, std::vector<Neighbor>> adjacency_;  // normalised -> neighbours
    std::map<std::pair<std::string, std::string>, std::size_t> cooc_;  // normalised, ordered pair
};

/// Records whose token sequence contains both phrases.
std::size_t cooccurrence_count(const std::vector<std::vector<std::string>>& conversations,
                               const std::string& a, const std::string& b);

/// Topics in `qc`, longest match, left to right, non-overlapping.
std::vector<std::string> extract_topics(const std::string& qc, const empathy::Lexicons& lexicons);

/// Inputs of the related-topic ranker, in this order.
inline const std::vector<std::string> kRelatedTopicFeatures = {"cooccurrence", "relation_frequency",
                                                               "popularity", "similarity"};

struct RelatedTopic {
    std::string topic;
    std::vector<double> features;
    double score = 0.0;
};

struct RelatedTopicContext {
    const ml::GbrtModel* ranker = nullptr;          // null: fixed default weighting
    const ml::DualEncoder* encoder = nullptr;       // for the similarity feature
    const std::map<std::string, double>* popularity = nullptr;  // normalised topic -> popularity
    std::string qc;
    std::size_t cap = 20;
};

double default_related_score(const std::vector<double>& features);

/// Graph neighbours of `topic`, scored, descending, ties by name, capped.
std::vector<RelatedTopic> related_topics(const KnowledgeGraph& kg, const std::string& topic,
                                         const RelatedTopicContext& ctx);

/// A standalone sentence usable as a response.
struct UnpairedRecord {
    std::string id;
    std::string text;
    EmpathyVector e_r;

    static std::string content_id(const std::string& text);
    json to_json() const;
    static UnpairedRecord from_json(const json& j, const EmpathySchema& schema);
};

class UnpairedIndex {
public:
    static UnpairedIndex build(std::vector<UnpairedRecord> records);

    const std::vector<UnpairedRecord>& records() const { return records_; }
    const retrieval::InvertedIndex& keywords() const { return index_; }
    std::size_t size() const { return records_.size(); }

    void save(const std::filesystem::path& path) const;
    static UnpairedIndex load(const std::filesystem::path& path, const EmpathySchema& schema);

private:
    std::vector<UnpairedRecord> records_;
    retrieval::InvertedIndex index_;
};

struct UnpairedParams {
    std::size_t cap = 400;
    std::size_t search_limit = 2000;  // keyword hits considered before demotion
    retrieval::Bm25Params bm25;
};

/// Share of the sentence's content words that also occur in qc.
double echo_overlap(const std::string& sentence, const std::string& qc, const empathy::Lexicons* lexicons);

/// Keyword search for the topics of qc plus their related topics (qc alone
/// when both are empty). Each hit's score is multiplied by one minus its echo
/// overlap with qc; sentences equal to qc are dropped.
std::vector<ResponseCandidate> retrieve_unpaired(const UnpairedIndex& index, const std::string& qc,
                                                 const std::vector<std::string>& topics,
                                                 const std::vector<std::string>& related,
                                                 const PersonaProfile& bot, const empathy::Lexicons* lexicons,
                                                 const UnpairedParams& params = {});

}  // namespace socialbot::kg
