#pragma once

#include <map>
#include <string>
#include <vector>

#include "socialbot/core/types.hpp"

namespace socialbot {

/// Closed value sets for the dialogue acts, emotions and opinions.
inline const std::vector<std::string> kIntents = {"greet",  "farewell", "request", "inform",
                                                  "question", "answer", "accept",  "reject",
                                                  "thank",  "apologize", "other"};
inline const std::vector<std::string> kSentiments = {"happy", "sad", "angry", "fearful",
                                                     "neutral"};
inline const std::vector<std::string> kOpinions = {"positive", "negative", "neutral"};

/// One categorical key and its admissible values. Slot 0 is the fallback
/// ("unknown"/"none") that absorbs absent and unlisted values.
struct SchemaBlock {
    std::string key;
    std::vector<std::string> values;
};

/// Dense encoding of an empathy annotation: one one-hot block per key,
/// concatenated, then scaled to unit L2 norm. Because every block contributes
/// exactly one hot entry, the scale is 1/sqrt(#blocks).
class EmpathySchema {
public:
    EmpathySchema() = default;
    explicit EmpathySchema(std::vector<SchemaBlock> blocks);

    /// Standard deployment layout. `topics` fills the topic block (sorted,
    /// deduplicated); `persona_values` lists the values per persona key.
    static EmpathySchema standard(std::vector<std::string> topics,
                                  const std::map<std::string, std::vector<std::string>>& persona_values);

    static EmpathySchema from_json(const json& j, std::vector<std::string> topics);

    std::size_t dim() const { return dim_; }
    const std::vector<SchemaBlock>& blocks() const { return blocks_; }
    const SchemaBlock* block(const std::string& key) const;

    std::vector<double> encode(const std::map<std::string, std::string>& kv) const;

    /// Builds a vector from kv and fills `dense`.
    EmpathyVector make(std::map<std::string, std::string> kv) const;

    /// True when `value` is listed for `key` (fallback slot included).
    bool admits(const std::string& key, const std::string& value) const;

private:
    std::vector<SchemaBlock> blocks_;
    std::vector<std::size_t> offsets_;
    std::vector<std::map<std::string, std::size_t>> index_;
    std::size_t dim_ = 0;
};

}  // namespace socialbot
