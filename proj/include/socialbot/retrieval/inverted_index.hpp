#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace socialbot::retrieval {

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;
    bool operator==(const Posting&) const = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct ScoredDoc {
    std::uint32_t doc = 0;
    double score = 0.0;
};

/// In-memory inverted index over tokenized documents numbered 0..N-1.
///
/// BM25 uses the non-negative idf ln(1 + (N - df + 0.5) / (df + 0.5)) and
/// sums over the distinct query terms in first-occurrence order. The TF-IDF
/// match score is sum over distinct query terms of tf * ln(1 + N / df).
class InvertedIndex {
public:
    static InvertedIndex build(const std::vector<std::string>& documents);

    std::size_t doc_count() const { return doc_lengths_.size(); }
    std::uint32_t doc_length(std::uint32_t doc) const { return doc_lengths_.at(doc); }
    double avg_doc_length() const { return avg_length_; }
    std::size_t df(const std::string& token) const;
    std::uint32_t tf(const std::string& token, std::uint32_t doc) const;
    const std::vector<Posting>* postings(const std::string& token) const;
    const std::map<std::string, std::vector<Posting>>& vocabulary() const { return postings_; }

    double idf(const std::string& token) const;
    double bm25(const std::vector<std::string>& query_terms, std::uint32_t doc, const Bm25Params& p = {}) const;
    double tfidf(const std::vector<std::string>& query_terms, std::uint32_t doc) const;

    /// BM25-scored docs sharing at least one term with the query, descending,
    /// ties by doc id ascending, at most `limit`.
    std::vector<ScoredDoc> keyword_search(std::string_view query, std::size_t limit,
                                          const Bm25Params& p = {}) const;

    /// Distinct tokens of `query`, first occurrence order.
    static std::vector<std::string> query_terms(std::string_view query);

    /// Deterministic binary encoding; build -> serialize is byte-stable.
    std::string serialize() const;
    static InvertedIndex deserialize(std::string_view bytes, std::size_t& offset);

    bool operator==(const InvertedIndex&) const = default;

private:
    std::map<std::string, std::vector<Posting>> postings_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_length_ = 0.0;
};

}  // namespace socialbot::retrieval
