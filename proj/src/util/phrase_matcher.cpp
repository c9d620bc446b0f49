#include "socialbot/util/phrase_matcher.hpp"

#include <algorithm>

namespace socialbot::text {

void PhraseMatcher::add(const std::vector<std::string>& tokens, std::size_t id) {
    if (tokens.empty()) return;
    auto& bucket = by_first_[tokens.front()];
    for (const auto& [phrase, _] : bucket) {
        if (phrase == tokens) return;
    }
    bucket.emplace_back(tokens, id);
    std::stable_sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) {
        return a.first.size() > b.first.size();
    });
}

std::vector<PhraseMatcher::Match> PhraseMatcher::match(const std::vector<std::string>& tokens) const {
    std::vector<Match> out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        auto it = by_first_.find(tokens[i]);
        bool hit = false;
        if (it != by_first_.end()) {
            for (const auto& [phrase, id] : it->second) {
                if (i + phrase.size() > tokens.size()) continue;
                if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                    out.push_back({i, i + phrase.size(), id});
                    i += phrase.size();
                    hit = true;
                    break;
                }
            }
        }
        if (!hit) ++i;
    }
    return out;
}

}  // namespace socialbot::text
