#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "socialbot/nrg/nrg.hpp"
#include "socialbot/service/resources.hpp"
#include "socialbot/service/training.hpp"
#include "socialbot/util/jsonl.hpp"

namespace fixtures {

using socialbot::json;

inline std::filesystem::path data_dir() { return SOCIALBOT_DATA_DIR; }

inline socialbot::service::EngineConfig shipped_config() {
    return socialbot::service::EngineConfig::load(data_dir() / "config" / "engine.json");
}

/// The shipped engine, loaded once per process.
inline std::shared_ptr<const socialbot::service::Resources> shipped() {
    static std::once_flag once;
    static std::shared_ptr<const socialbot::service::Resources> res;
    std::call_once(once, [] { res = socialbot::service::Resources::load(shipped_config()); });
    return res;
}

inline json load(const std::string& relative) { return socialbot::load_json(data_dir() / relative); }

// Persona-marked corpus: replies whose wording depends on the responder.

struct PersonaCorpus {
    socialbot::nrg::Vocab vocab;
    std::vector<socialbot::nrg::NrgExample> train;
    std::vector<socialbot::nrg::NrgExample> heldout;
    struct Probe {
        std::vector<int> query;
        Eigen::VectorXd e_q, e_r_a, e_r_b;
    };
    std::vector<Probe> probes;
    std::size_t k = 0;
};

inline Eigen::VectorXd dense(const socialbot::EmpathySchema& schema, const json& kv) {
    const auto v = schema.make(kv.get<std::map<std::string, std::string>>()).dense;
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline PersonaCorpus persona_corpus(const socialbot::EmpathySchema& schema) {
    const json j = load("fixtures/persona_corpus.json");
    PersonaCorpus c;
    c.k = schema.dim();
    std::vector<std::string> texts;
    for (const auto& r : j.at("train")) {
        texts.push_back(r.at("query").get<std::string>());
        texts.push_back(r.at("response").get<std::string>());
    }
    c.vocab = socialbot::nrg::Vocab::build(texts);
    auto example = [&](const json& r) {
        socialbot::nrg::NrgExample ex;
        ex.query = c.vocab.encode(r.at("query").get<std::string>());
        ex.e_q = dense(schema, r.at("e_q"));
        ex.e_r = dense(schema, r.at("e_r"));
        ex.response = c.vocab.encode(r.at("response").get<std::string>());
        ex.response.push_back(socialbot::nrg::Vocab::kEos);
        return ex;
    };
    for (const auto& r : j.at("train")) c.train.push_back(example(r));
    for (const auto& r : j.at("heldout")) c.heldout.push_back(example(r));
    for (const auto& p : j.at("probes")) {
        c.probes.push_back({c.vocab.encode(p.at("query").get<std::string>()), dense(schema, p.at("e_q")),
                            dense(schema, p.at("e_r_a")), dense(schema, p.at("e_r_b"))});
    }
    return c;
}

/// The first `n` stored pairs of the shipped engine as generator training data.
struct StoreCorpus {
    socialbot::nrg::Vocab vocab;
    std::vector<socialbot::nrg::NrgExample> examples;
};

inline StoreCorpus store_corpus(const socialbot::service::Resources& res, std::size_t n) {
    const auto& all = res.paired->records();
    std::vector<socialbot::retrieval::PairedRecord> recs(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(n, all.size())));
    StoreCorpus c;
    c.vocab = socialbot::service::nrg_vocab(recs);
    c.examples = socialbot::service::nrg_examples(recs, c.vocab);
    return c;
}

}  // namespace fixtures
