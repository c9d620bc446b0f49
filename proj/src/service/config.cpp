#include "socialbot/service/config.hpp"

namespace socialbot::service {

namespace {

const std::map<std::string, std::string> kDefaultPaths = {
    {"lexicons", "lexicons.jsonl"},
    {"heuristics", "config/empathy_heuristics.json"},
    {"editorial", "config/editorial.json"},
    {"filter_rules", "config/filter_rules.json"},
    {"bot_persona", "config/bot_persona.json"},
    {"skills", "config/skills.json"},
    {"weather", "config/weather.json"},
    {"topics", "corpus/topics.jsonl"},
    {"paired_corpus", "corpus/paired.jsonl"},
    {"unpaired_corpus", "corpus/unpaired.jsonl"},
    {"triples", "corpus/triples.tsv"},
    {"paired_store", "store/paired.jsonl"},
    {"unpaired_store", "store/unpaired.jsonl"},
    {"paired_index", "store/paired.idx"},
    {"unpaired_index", "store/unpaired.idx"},
    {"kg", "store/kg.json"},
    {"encoder", "models/encoder.json"},
    {"ranker_model", "models/ranker.json"},
    {"nrg_model", "models/nrg.json"},
    {"switch_model", "models/switch.json"},
    {"topic_model", "models/topic_ranker.json"},
    {"related_model", "models/related_ranker.json"},
    {"session_log", ""},
};

const std::map<std::string, std::vector<std::string>> kDefaultPersonaValues = {
    {"gender", {"female", "male"}},
    {"age", {"teen", "young_adult", "adult", "senior"}},
    {"interests", {"music", "sports", "travel", "food", "movies", "books", "technology"}},
    {"occupation", {"student", "teacher", "engineer", "doctor", "artist", "chef", "musician"}},
    {"personality", {"cheerful", "calm", "curious", "caring", "witty"}},
};

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

EngineConfig EngineConfig::defaults() {
    EngineConfig c;
    c.paths = kDefaultPaths;
    c.persona_values = kDefaultPersonaValues;
    c.nrg_train.epochs = 30;
    return c;
}

EngineConfig EngineConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    EngineConfig c = defaults();
    c.data_dir = base_dir / j.value("data_dir", ".");
    if (j.contains("paths")) {
        for (auto& [k, v] : j.at("paths").items()) c.paths[k] = v.is_null() ? "" : v.get<std::string>();
    }
    if (j.contains("dims")) {
        const auto& d = j.at("dims");
        read(d, "d", c.hidden_dim);
        if (d.contains("k") && !d.at("k").is_null()) c.empathy_dim = d.at("k").get<std::size_t>();
    }
    if (j.contains("persona_values")) {
        c.persona_values = j.at("persona_values").get<std::map<std::string, std::vector<std::string>>>();
    }
    if (j.contains("retrieval")) {
        const auto& r = j.at("retrieval");
        read(r, "keyword_limit", c.paired.keyword_limit);
        read(r, "semantic_limit", c.paired.semantic_limit);
        read(r, "paired_cap", c.paired.cap);
        read(r, "semantic_min_score", c.paired.semantic_min_score);
        read(r, "unpaired_cap", c.unpaired.cap);
        read(r, "unpaired_search_limit", c.unpaired.search_limit);
        read(r, "bm25_k1", c.paired.bm25.k1);
        read(r, "bm25_b", c.paired.bm25.b);
        c.unpaired.bm25 = c.paired.bm25;
    }
    if (j.contains("kg")) {
        read(j.at("kg"), "threshold", c.kg_threshold);
        read(j.at("kg"), "related_cap", c.related_cap);
    }
    if (j.contains("ranker")) read(j.at("ranker"), "threshold", c.rank_threshold);
    if (j.contains("beam")) {
        read(j.at("beam"), "width", c.beam.beam_width);
        read(j.at("beam"), "max_len", c.beam.max_len);
        read(j.at("beam"), "max_results", c.beam.max_results);
    }
    if (j.contains("session")) {
        const auto& s = j.at("session");
        read(s, "timeout_minutes", c.timeout_minutes);
        read(s, "context_turns", c.context_turns);
        read(s, "repetition_window", c.repetition_window);
        read(s, "time_budget_ms", c.time_budget_ms);
        read(s, "break_prompt", c.break_prompt);
    }
    if (j.contains("topic")) read(j.at("topic"), "half_life_days", c.topic_half_life_days);
    read(j, "generators", c.generators);
    if (j.contains("encoder")) {
        const auto& e = j.at("encoder");
        read(e, "train_if_missing", c.train_encoder_if_missing);
        read(e, "hash_size", c.encoder.hash_size);
        read(e, "dim", c.encoder.dim);
        read(e, "epochs", c.encoder.epochs);
        read(e, "learning_rate", c.encoder.learning_rate);
        read(e, "negatives", c.encoder.negatives);
        read(e, "margin", c.encoder.margin);
        read(e, "seed", c.encoder.seed);
    }
    if (j.contains("nrg_train")) {
        const auto& n = j.at("nrg_train");
        read(n, "learning_rate", c.nrg_train.learning_rate);
        read(n, "epochs", c.nrg_train.epochs);
        read(n, "seed", c.nrg_train.seed);
        read(n, "clip_norm", c.nrg_train.clip_norm);
        read(n, "lr_decay", c.nrg_train.lr_decay);
    }
    read(j, "seed", c.seed);

    if (c.timeout_minutes <= 0) throw DataError("config: timeout_minutes must be positive");
    if (c.kg_threshold == 0) throw DataError("config: kg threshold must be at least 1");
    if (c.beam.beam_width == 0 || c.beam.max_len == 0) throw DataError("config: beam width and max_len must be positive");
    for (const auto& g : c.generators) {
        if (g != "paired" && g != "unpaired" && g != "neural") throw DataError("config: unknown generator " + g);
    }
    return c;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path, const std::filesystem::path& data_dir_override) {
    EngineConfig c = from_json(load_json(path), path.parent_path());
    if (!data_dir_override.empty()) c.data_dir = data_dir_override;
    return c;
}

json EngineConfig::to_json() const {
    json j;
    j["data_dir"] = data_dir.string();
    j["paths"] = paths;
    j["dims"] = {{"d", hidden_dim}, {"k", empathy_dim ? json(*empathy_dim) : json(nullptr)}};
    j["persona_values"] = persona_values;
    j["retrieval"] = {{"keyword_limit", paired.keyword_limit},
                      {"semantic_limit", paired.semantic_limit},
                      {"paired_cap", paired.cap},
                      {"semantic_min_score", paired.semantic_min_score},
                      {"unpaired_cap", unpaired.cap},
                      {"unpaired_search_limit", unpaired.search_limit},
                      {"bm25_k1", paired.bm25.k1},
                      {"bm25_b", paired.bm25.b}};
    j["kg"] = {{"threshold", kg_threshold}, {"related_cap", related_cap}};
    j["ranker"] = {{"threshold", rank_threshold}};
    j["beam"] = {{"width", beam.beam_width}, {"max_len", beam.max_len}, {"max_results", beam.max_results}};
    j["session"] = {{"timeout_minutes", timeout_minutes},
                    {"context_turns", context_turns},
                    {"repetition_window", repetition_window},
                    {"time_budget_ms", time_budget_ms},
                    {"break_prompt", break_prompt}};
    j["topic"] = {{"half_life_days", topic_half_life_days}};
    j["generators"] = generators;
    j["encoder"] = {{"train_if_missing", train_encoder_if_missing},
                    {"hash_size", encoder.hash_size},
                    {"dim", encoder.dim},
                    {"epochs", encoder.epochs},
                    {"learning_rate", encoder.learning_rate},
                    {"negatives", encoder.negatives},
                    {"margin", encoder.margin},
                    {"seed", encoder.seed}};
    j["nrg_train"] = {{"learning_rate", nrg_train.learning_rate},
                      {"epochs", nrg_train.epochs},
                      {"seed", nrg_train.seed},
                      {"clip_norm", nrg_train.clip_norm},
                      {"lr_decay", nrg_train.lr_decay}};
    j["seed"] = seed;
    return j;
}

std::filesystem::path EngineConfig::path(const std::string& name) const {
    auto it = paths.find(name);
    if (it == paths.end() || it->second.empty()) return {};
    std::filesystem::path p(it->second);
    return p.is_absolute() ? p : data_dir / p;
}

std::optional<std::filesystem::path> EngineConfig::existing(const std::string& name) const {
    auto p = path(name);
    if (p.empty() || !std::filesystem::exists(p)) return std::nullopt;
    return p;
}

}  // namespace socialbot::service
