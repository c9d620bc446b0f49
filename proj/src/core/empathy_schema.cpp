#include "socialbot/core/empathy_schema.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace socialbot {

EmpathySchema::EmpathySchema(std::vector<SchemaBlock> blocks) : blocks_(std::move(blocks)) {
    std::set<std::string> keys;
    for (const auto& b : blocks_) {
        if (b.values.empty()) throw std::invalid_argument("schema block without values: " + b.key);
        if (!keys.insert(b.key).second) throw std::invalid_argument("duplicate schema key: " + b.key);
        offsets_.push_back(dim_);
        std::map<std::string, std::size_t> idx;
        for (std::size_t i = 0; i < b.values.size(); ++i) {
            if (!idx.emplace(b.values[i], i).second) {
                throw std::invalid_argument("duplicate value '" + b.values[i] + "' for " + b.key);
            }
        }
        index_.push_back(std::move(idx));
        dim_ += b.values.size();
    }
}

EmpathySchema EmpathySchema::standard(
    std::vector<std::string> topics,
    const std::map<std::string, std::vector<std::string>>& persona_values) {
    std::sort(topics.begin(), topics.end());
    topics.erase(std::unique(topics.begin(), topics.end()), topics.end());
    std::erase(topics, "none");
    topics.insert(topics.begin(), "none");

    std::vector<SchemaBlock> blocks;
    blocks.push_back({"topic", topics});
    blocks.push_back({"topic_shift", {"false", "true"}});
    std::vector<std::string> intents = {"unknown"};
    intents.insert(intents.end(), kIntents.begin(), kIntents.end());
    blocks.push_back({"intent", intents});
    std::vector<std::string> sentiments = {"unknown"};
    sentiments.insert(sentiments.end(), kSentiments.begin(), kSentiments.end());
    blocks.push_back({"sentiment", sentiments});
    blocks.push_back({"sentiment_change", {"false", "true"}});
    std::vector<std::string> opinions = {"unknown"};
    opinions.insert(opinions.end(), kOpinions.begin(), kOpinions.end());
    blocks.push_back({"opinion", opinions});
    blocks.push_back({"style", {"none", "sharing", "comforting", "encouraging", "calming", "curious"}});
    for (auto key : kPersonaKeys) {
        std::vector<std::string> values = {"unknown"};
        if (auto it = persona_values.find(std::string(key)); it != persona_values.end()) {
            for (const auto& v : it->second) {
                if (v != "unknown" && std::find(values.begin(), values.end(), v) == values.end()) {
                    values.push_back(v);
                }
            }
        }
        blocks.push_back({std::string(key), values});
    }
    return EmpathySchema(std::move(blocks));
}

EmpathySchema EmpathySchema::from_json(const json& j, std::vector<std::string> topics) {
    std::map<std::string, std::vector<std::string>> persona;
    if (j.contains("persona_values")) {
        for (auto& [k, v] : j["persona_values"].items()) {
            persona[k] = v.get<std::vector<std::string>>();
        }
    }
    return standard(std::move(topics), persona);
}

const SchemaBlock* EmpathySchema::block(const std::string& key) const {
    for (const auto& b : blocks_) {
        if (b.key == key) return &b;
    }
    return nullptr;
}

std::vector<double> EmpathySchema::encode(const std::map<std::string, std::string>& kv) const {
    std::vector<double> dense(dim_, 0.0);
    if (blocks_.empty()) return dense;
    const double scale = 1.0 / std::sqrt(static_cast<double>(blocks_.size()));
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        std::size_t slot = 0;
        if (auto it = kv.find(blocks_[b].key); it != kv.end()) {
            if (auto s = index_[b].find(it->second); s != index_[b].end()) slot = s->second;
        }
        dense[offsets_[b] + slot] = scale;
    }
    return dense;
}

EmpathyVector EmpathySchema::make(std::map<std::string, std::string> kv) const {
    EmpathyVector e;
    e.dense = encode(kv);
    e.kv = std::move(kv);
    return e;
}

bool EmpathySchema::admits(const std::string& key, const std::string& value) const {
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (blocks_[b].key == key) return index_[b].count(value) > 0;
    }
    return false;
}

}  // namespace socialbot
