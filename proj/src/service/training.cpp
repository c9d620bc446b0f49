#include "socialbot/service/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "socialbot/util/text.hpp"

namespace socialbot::service {

std::vector<nrg::NrgExample> nrg_examples(const std::vector<retrieval::PairedRecord>& records,
                                          const nrg::Vocab& vocab) {
    std::vector<nrg::NrgExample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(nrg::make_example(vocab, r.qc, r.e_q.dense, r.e_r.dense, r.response));
    }
    return out;
}

nrg::Vocab nrg_vocab(const std::vector<retrieval::PairedRecord>& records, std::size_t min_count) {
    std::vector<std::string> texts;
    texts.reserve(records.size() * 2);
    for (const auto& r : records) {
        texts.push_back(r.qc);
        texts.push_back(r.response);
    }
    return nrg::Vocab::build(texts, min_count);
}

std::pair<std::vector<retrieval::PairedRecord>, std::vector<retrieval::PairedRecord>> split_heldout(
    const std::vector<retrieval::PairedRecord>& records, std::size_t every) {
    std::vector<retrieval::PairedRecord> train;
    std::vector<retrieval::PairedRecord> held;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (every > 0 && i % every == every - 1 ? held : train).push_back(records[i]);
    }
    return {train, held};
}

std::vector<ml::LabeledExample> self_labelled_ranker_data(const Resources& res, std::size_t max_queries,
                                                          std::uint64_t seed) {
    const auto& recs = res.paired->records();
    std::vector<std::size_t> order(recs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    if (order.size() > max_queries) order.resize(max_queries);

    const auto gens = res.select_generators(res.config.generators);
    chat::FeatureContext fctx;
    fctx.empathy = res.empathy.get();
    fctx.pair_encoder = res.encoder.get();
    fctx.bot = res.bot;
    fctx.context_turns = res.config.context_turns;

    std::vector<ml::LabeledExample> out;
    for (const std::size_t i : order) {
        const auto& rec = recs[i];
        const WorkingMemory empty;
        const auto ann = res.empathy->annotate(rec.qc, empty, nullptr, res.bot, empathy::TopicDecision::keep());
        const auto gen = chat::generate_candidates(ann.state, gens);
        const chat::FeatureExtractor fx(fctx, ann.state);
        const auto qwords = res.lexicons->content_words(rec.qc);
        const std::set<std::string> qset(qwords.begin(), qwords.end());
        const std::string own = text::normalize(rec.response);
        for (const auto& c : gen.candidates) {
            ml::LabeledExample ex;
            ex.features = fx.features(c).values;
            if (text::normalize(c.text) == own) {
                ex.label = 2.0;
            } else {
                const auto cw = res.lexicons->content_words(c.text);
                const bool shares = std::any_of(cw.begin(), cw.end(), [&](const std::string& w) { return qset.count(w) > 0; });
                ex.label = shares ? 1.0 : 0.0;
            }
            out.push_back(std::move(ex));
        }
    }
    return out;
}

}  // namespace socialbot::service
