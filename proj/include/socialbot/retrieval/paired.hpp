#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socialbot/core/candidate.hpp"
#include "socialbot/core/empathy_schema.hpp"
#include "socialbot/ml/dual_encoder.hpp"
#include "socialbot/retrieval/inverted_index.hpp"

namespace socialbot::retrieval {

/// One filtered (qc, response, e_q, e_r) tuple. The id is a content hash of
/// the normalised qc and response, so re-ingesting a pair replaces it.
struct PairedRecord {
    std::string id;
    std::string qc;
    std::string response;
    EmpathyVector e_q;
    EmpathyVector e_r;
    std::string source = "internet";  // internet | own_log

    static std::string content_id(const std::string& qc, const std::string& response);

    json to_json() const;
    /// Dense encodings are rebuilt from kv through `schema`.
    static PairedRecord from_json(const json& j, const EmpathySchema& schema);
};

/// Header line written before the binary payload of an index file.
struct IndexFileHeader {
    int schema_version = 1;
    std::string kind;
    std::size_t doc_count = 0;
    std::string checksum;  // FNV-1a 64 of the payload, hex
    std::size_t payload_bytes = 0;
};

/// Writes `header-json \n payload`; reads it back verifying size and checksum.
void write_index_file(const std::filesystem::path& path, IndexFileHeader header, const std::string& payload);
std::string read_index_file(const std::filesystem::path& path, const std::string& kind, IndexFileHeader* header = nullptr);

/// Keyword index over stored qc plus precomputed unit-norm qc encodings.
class PairedIndex {
public:
    PairedIndex() = default;

    /// `encoder` may be null; semantic search is then unavailable.
    static PairedIndex build(std::vector<PairedRecord> records, const ml::DualEncoder* encoder);

    const std::vector<PairedRecord>& records() const { return records_; }
    const InvertedIndex& keywords() const { return index_; }
    bool has_encodings() const { return encodings_.rows() > 0 || records_.empty(); }
    std::size_t size() const { return records_.size(); }

    std::vector<ScoredDoc> keyword_search(const std::string& qc, std::size_t limit,
                                          const Bm25Params& p = {}) const;

    /// Cosine against every stored qc encoding, descending, ties by doc id.
    std::vector<ScoredDoc> semantic_search(const ml::DualEncoder& encoder, const std::string& qc,
                                           std::size_t limit) const;

    void save(const std::filesystem::path& path) const;
    static PairedIndex load(const std::filesystem::path& path, const EmpathySchema& schema,
                            const ml::DualEncoder* encoder);

private:
    std::vector<PairedRecord> records_;
    InvertedIndex index_;
    Eigen::MatrixXd encodings_;  // one row per record
};

struct PairedRetrievalParams {
    std::size_t keyword_limit = 400;
    std::size_t semantic_limit = 400;
    std::size_t cap = 400;
    double semantic_min_score = 0.3;
    Bm25Params bm25;
};

/// Stored response persona value contradicts the bot's for some persona key.
bool persona_conflict(const EmpathyVector& stored_e_r, const PersonaProfile& bot);

/// Union of keyword and semantic hits, deduplicated by record. Keyword
/// scores are scaled by the best keyword score; the merged score is the max
/// of the scaled keyword score and the cosine. Records whose stored e_r
/// conflicts with the bot persona are dropped before the cap.
std::vector<ResponseCandidate> retrieve_paired(const PairedIndex& index, const ml::DualEncoder* encoder,
                                               const std::string& qc, const PersonaProfile& bot,
                                               const PairedRetrievalParams& params = {});

}  // namespace socialbot::retrieval
