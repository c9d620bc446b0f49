#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socialbot/core/types.hpp"

namespace socialbot {

enum class CandidateSource { Paired, Unpaired, Neural };

std::string_view to_string(CandidateSource s);

/// Word- and semantic-level match between the contextual query and the query
/// side of a retrieved pair. Only paired candidates have one.
struct RetrievalMatch {
    double bm25 = 0.0;
    double tfidf = 0.0;
    double cosine = 0.0;
    bool present = false;
};

/// Fixed-order named feature vector consumed by the candidate ranker.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;

    double at(std::string_view name) const;
};

struct ResponseCandidate {
    std::string text;
    CandidateSource source = CandidateSource::Paired;
    std::string provenance;         // record id, sentence id or beam rank
    double generator_score = 0.0;   // merged retrieval score or normalised log-prob
    RetrievalMatch retrieval;
    std::optional<EmpathyVector> stored_e_r;  // empathy of the stored response, when known
    FeatureVector features;
    std::optional<double> rank_score;
};

json to_json(const ResponseCandidate& c);

}  // namespace socialbot
