#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace socialbot::text {

/// Longest-match, left-to-right, non-overlapping phrase lookup over token
/// sequences. Phrases are token vectors; each carries a caller payload id.
class PhraseMatcher {
public:
    struct Match {
        std::size_t first = 0;  // token index, inclusive
        std::size_t last = 0;   // token index, exclusive
        std::size_t id = 0;
    };

    /// Registers a phrase. A phrase added twice keeps the first id.
    void add(const std::vector<std::string>& tokens, std::size_t id);

    std::vector<Match> match(const std::vector<std::string>& tokens) const;

    bool empty() const { return by_first_.empty(); }

private:
    // first token -> phrases starting with it, longest first
    std::map<std::string, std::vector<std::pair<std::vector<std::string>, std::size_t>>> by_first_;
};

}  // namespace socialbot::text
