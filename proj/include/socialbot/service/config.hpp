#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socialbot/kg/knowledge_graph.hpp"
#include "socialbot/ml/dual_encoder.hpp"
#include "socialbot/nrg/nrg.hpp"
#include "socialbot/retrieval/paired.hpp"

namespace socialbot::service {

/// Every tunable of the engine, read from one JSON file. Relative paths are
/// resolved against `data_dir`, which itself is relative to the config file.
struct EngineConfig {
    std::filesystem::path data_dir = ".";
    std::map<std::string, std::string> paths;

    std::size_t hidden_dim = 32;               // d
    std::optional<std::size_t> empathy_dim;    // k; must match the schema when given
    std::map<std::string, std::vector<std::string>> persona_values;

    retrieval::PairedRetrievalParams paired;
    kg::UnpairedParams unpaired;
    std::size_t kg_threshold = 3;
    std::size_t related_cap = 20;
    double rank_threshold = 1.0;
    nrg::BeamParams beam;
    double timeout_minutes = 30.0;
    std::size_t context_turns = 3;
    std::size_t repetition_window = 3;
    double time_budget_ms = 0.0;
    double topic_half_life_days = 7.0;
    std::string break_prompt = "We have been chatting for a while. Let us take a break and talk again later!";
    std::vector<std::string> generators = {"paired", "unpaired", "neural"};

    bool train_encoder_if_missing = true;
    ml::DualEncoderParams encoder;
    nrg::NrgTrainParams nrg_train;
    std::uint64_t seed = 1;

    static EngineConfig defaults();
    static EngineConfig from_json(const json& j, const std::filesystem::path& base_dir);
    /// `data_dir_override` replaces the configured data directory when non-empty.
    static EngineConfig load(const std::filesystem::path& path, const std::filesystem::path& data_dir_override = {});
    json to_json() const;

    /// Absolute or data_dir-relative path for a named entry; empty when unset.
    std::filesystem::path path(const std::string& name) const;
    /// Like path(), but only when the file exists.
    std::optional<std::filesystem::path> existing(const std::string& name) const;

    TimestampMs timeout_ms() const { return static_cast<TimestampMs>(timeout_minutes * 60'000.0); }
};

}  // namespace socialbot::service
