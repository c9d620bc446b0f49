#include "socialbot/core/candidate.hpp"

#include <stdexcept>

namespace socialbot {

std::string_view to_string(CandidateSource s) {
    switch (s) {
        case CandidateSource::Paired: return "paired";
        case CandidateSource::Unpaired: return "unpaired";
        case CandidateSource::Neural: return "neural";
    }
    return "paired";
}

double FeatureVector::at(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values[i];
    }
    throw std::out_of_range("no feature named " + std::string(name));
}

json to_json(const ResponseCandidate& c) {
    json features = json::object();
    for (std::size_t i = 0; i < c.features.names.size(); ++i) features[c.features.names[i]] = c.features.values[i];
    json j{{"text", c.text},
           {"source", std::string(to_string(c.source))},
           {"provenance", c.provenance},
           {"generator_score", c.generator_score},
           {"features", features}};
    j["rank_score"] = c.rank_score ? json(*c.rank_score) : json(nullptr);
    return j;
}

}  // namespace socialbot
