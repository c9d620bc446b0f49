// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "socialbot/chat/core_chat.hpp"
#include "socialbot/dm/dialogue_manager.hpp"
#include "socialbot/kg/knowledge_graph.hpp"
#include "socialbot/ml/gbrt.hpp"
#include "socialbot/nrg/nrg.hpp"
#include "socialbot/retrieval/inverted_index.hpp"
#include "socialbot/service/engine.hpp"
#include "socialbot/service/evaluation.hpp"
#include "socialbot/service/ingest.hpp"
#include "socialbot/service/metrics.hpp"
#include "socialbot/util/text.hpp"

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace socialbot;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Wall = std::chrono::steady_clock;

double seconds_since(Wall::time_point t0) {
    return std::chrono::duration<double>(Wall::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream o;
    o.precision(prec);
    o << v;
    return o.str();
}

VectorXd random_vec(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

nrg::Vocab letters(int n) {
    std::vector<std::string> toks;
    for (int i = 0; i < n; ++i) toks.push_back(std::string(1, static_cast<char>('a' + i)));
    return nrg::Vocab::minimal(toks);
}

// 1 ----------------------------------------------------------------------------

Outcome gradient_check() {
    const auto t0 = Wall::now();
    double worst = 0.0;
    std::string worst_name;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        nrg::NrgModel model = nrg::NrgModel::random(letters(5), 4, 3, seed, 0.5);
        std::mt19937_64 rng(seed * 101);
        nrg::NrgExample ex;
        ex.query = {1, 2, 3, 5};
        ex.response = {4, 2, 5, nrg::Vocab::kEos};
        ex.e_q = random_vec(rng, 3, 0.0, 1.0);
        ex.e_r = random_vec(rng, 3, 0.0, 1.0);

        nrg::NrgParams grad = model.params().zeros_like();
        nrg::nll_and_gradient(ex, model, grad);
        std::map<std::string, Eigen::MatrixXd> analytic;
        grad.for_each([&](const std::string& name, const Eigen::MatrixXd& m) { analytic[name] = m; });

        nrg::NrgModel probe = model;
        const double h = 1e-6;
        probe.params().for_each([&](const std::string& name, Eigen::MatrixXd& m) {
            Eigen::MatrixXd numeric(m.rows(), m.cols());
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                for (Eigen::Index j = 0; j < m.cols(); ++j) {
                    const double keep = m(i, j);
                    m(i, j) = keep + h;
                    const double up = -nrg::sequence_log_prob(ex, probe);
                    m(i, j) = keep - h;
                    const double down = -nrg::sequence_log_prob(ex, probe);
                    m(i, j) = keep;
                    numeric(i, j) = (up - down) / (2.0 * h);
                }
            }
            const Eigen::MatrixXd& a = analytic.at(name);
            const double scale = std::max(a.norm(), numeric.norm());
            const double rel = scale < 1e-10 ? 0.0 : (a - numeric).norm() / scale;
            if (rel > worst) {
                worst = rel;
                worst_name = name;
            }
        });
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 10.0,
            "max relative error " + fmt(worst) + " (" + worst_name + "), " + fmt(secs) + " s"};
}

// 2 ----------------------------------------------------------------------------

Outcome softmax_sums() {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> vocab(2, 60), dim(1, 16), kdim(1, 8);
    std::uniform_real_distribution<double> scale(0.05, 4.0);
    double worst = 0.0;
    bool nonneg = true;
    for (int t = 0; t < 100; ++t) {
        const int V = vocab(rng);
        const auto d = static_cast<std::size_t>(dim(rng));
        const auto k = static_cast<std::size_t>(kdim(rng));
        auto m = nrg::NrgModel::random(letters(V - 1), d, k, 1000 + static_cast<std::uint64_t>(t), scale(rng));
        const VectorXd v = nrg::interactive_repr(random_vec(rng, static_cast<Eigen::Index>(k)),
                                                 random_vec(rng, static_cast<Eigen::Index>(k)), m);
        const VectorXd p = nrg::next_token_dist(random_vec(rng, static_cast<Eigen::Index>(d)), v, m);
        worst = std::max(worst, std::abs(p.sum() - 1.0));
        nonneg = nonneg && (p.array() >= 0.0).all() && p.allFinite();
    }
    return {worst <= 1e-9 && nonneg, "max |sum - 1| = " + fmt(worst)};
}

// 3 ----------------------------------------------------------------------------

Outcome gru_bounds() {
    std::mt19937_64 rng(3);
    bool zero_exact = true;
    for (int t = 0; t < 20; ++t) {
        auto z = nrg::NrgModel::zeros(letters(4), 6, 3);
        const VectorXd h = random_vec(rng, 6, -3.0, 3.0);
        const VectorXd out = nrg::gru_step(h, random_vec(rng, 6), random_vec(rng, 6), z);
        zero_exact = zero_exact && out == 0.5 * h;
    }
    std::size_t violations = 0;
    double worst_ref = 0.0;
    for (int t = 0; t < 1000; ++t) {
        auto m = nrg::NrgModel::random(letters(4), 5, 3, 5000 + static_cast<std::uint64_t>(t), 1.5);
        const VectorXd h = random_vec(rng, 5, -2.0, 2.0);
        const VectorXd e = random_vec(rng, 5);
        const VectorXd v = random_vec(rng, 5, 0.0, 1.0);
        const VectorXd out = nrg::gru_step(h, e, v, m);
        VectorXd l;
        const VectorXd ref = oracle::gru_reference(m, h, e, v, &l);
        worst_ref = std::max(worst_ref, (out - ref).cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < 5; ++i) {
            const double lo = std::min(h[i], l[i]) - 1e-12;
            const double hi = std::max(h[i], l[i]) + 1e-12;
            if (out[i] < lo || out[i] > hi) ++violations;
        }
    }
    const bool ok = zero_exact && violations == 0 && worst_ref < 1e-12;
    return {ok, std::string(zero_exact ? "zero model halves h" : "zero model does not halve h") + ", " +
                    std::to_string(violations) + " bound violations, max |h' - reference| = " + fmt(worst_ref)};
}

// 4 ----------------------------------------------------------------------------

Outcome beam_exhaustive() {
    std::size_t top_match = 0, greedy_match = 0;
    const std::size_t models = 20, max_len = 3;
    for (std::uint64_t s = 0; s < models; ++s) {
        auto m = nrg::NrgModel::random(letters(2), 4, 3, 900 + s, 1.5);
        std::mt19937_64 rng(s);
        const VectorXd eq = random_vec(rng, 3, 0.0, 1.0);
        const VectorXd er = random_vec(rng, 3, 0.0, 1.0);
        const std::vector<int> query = {1, 2, static_cast<int>(s % 3)};

        std::vector<int> best;
        double best_norm = -std::numeric_limits<double>::infinity();
        for (const auto& hyp : oracle::all_hypotheses(3, max_len)) {
            const double norm = oracle::prefix_log_prob(m, query, eq, er, hyp) / static_cast<double>(hyp.size());
            if (norm > best_norm) {
                best_norm = norm;
                best = hyp;
            }
        }
        const auto full = nrg::beam_search(query, eq, er, m, {27, max_len, 100});
        if (!full.empty() && full.front().tokens == best) ++top_match;
        const auto one = nrg::beam_search(query, eq, er, m, {1, max_len, 100});
        if (one.size() == 1 && one.front().tokens == oracle::greedy_decode(m, query, eq, er, max_len)) ++greedy_match;
    }
    return {top_match == models && greedy_match == models,
            "full-width top = exhaustive argmax on " + std::to_string(top_match) + "/20, width 1 = greedy on " +
                std::to_string(greedy_match) + "/20"};
}

// 5, 6, 7 ------------------------------------------------------------------------

struct StoreModel {
    nrg::NrgModel model;
    nrg::NrgTrainReport report;
    double seconds = 0.0;
};

const StoreModel& store_model() {
    static std::optional<StoreModel> cached;
    if (!cached) {
        const auto res = fixtures::shipped();
        const auto corpus = fixtures::store_corpus(*res, 200);
        StoreModel sm;
        const auto t0 = Wall::now();
        sm.model = nrg::NrgModel::random(corpus.vocab, res->config.hidden_dim, res->empathy->schema().dim(), 11);
        nrg::NrgTrainParams p = res->config.nrg_train;
        p.epochs = 50;
        nrg::train(sm.model, corpus.examples, p, &sm.report);
        sm.seconds = seconds_since(t0);
        cached = std::move(sm);
    }
    return *cached;
}

Outcome training_converges() {
    const auto res = fixtures::shipped();
    const std::size_t pairs = fixtures::store_corpus(*res, 200).examples.size();
    const auto& sm = store_model();
    const auto& nll = sm.report.epoch_nll;
    std::size_t down = 0;
    for (std::size_t e = 1; e < nll.size(); ++e) down += nll[e] <= nll[e - 1] ? 1 : 0;
    const double share = static_cast<double>(down) / static_cast<double>(nll.size() - 1);
    const double ppl0 = std::exp(nll.front());
    const double ppl_end = std::exp(nll.back());
    const bool ok = pairs == 200 && share >= 0.95 && ppl_end <= 0.5 * ppl0 && sm.seconds < 120.0;
    return {ok, std::to_string(pairs) + " pairs, non-increasing in " + fmt(100.0 * share) + "% of epochs, perplexity " +
                    fmt(ppl0) + " -> " + fmt(ppl_end) + " in " + std::to_string(nll.size() - 1) + " epochs, " +
                    fmt(sm.seconds) + " s"};
}

struct PersonaModels {
    fixtures::PersonaCorpus corpus;
    std::vector<nrg::NrgModel> conditioned;
    std::vector<nrg::NrgModel> constant;
};

const PersonaModels& persona_models() {
    static std::optional<PersonaModels> cached;
    if (!cached) {
        PersonaModels pm;
        pm.corpus = fixtures::persona_corpus(fixtures::shipped()->empathy->schema());
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            nrg::NrgTrainParams p;
            p.learning_rate = 0.1;
            p.epochs = 30;
            p.seed = seed;
            auto c = nrg::NrgModel::random(pm.corpus.vocab, 16, pm.corpus.k, seed);
            auto u = c;
            u.set_empathy_conditioned(false);
            nrg::train(c, pm.corpus.train, p);
            nrg::train(u, pm.corpus.train, p);
            pm.conditioned.push_back(std::move(c));
            pm.constant.push_back(std::move(u));
        }
        cached = std::move(pm);
    }
    return *cached;
}

Outcome conditioning_helps() {
    const auto& pm = persona_models();
    double c = 0.0, u = 0.0;
    for (std::size_t i = 0; i < pm.conditioned.size(); ++i) {
        c += nrg::perplexity(pm.conditioned[i], pm.corpus.heldout);
        u += nrg::perplexity(pm.constant[i], pm.corpus.heldout);
    }
    c /= static_cast<double>(pm.conditioned.size());
    u /= static_cast<double>(pm.constant.size());
    return {c <= u, "mean heldout perplexity conditioned " + fmt(c) + " vs constant " + fmt(u) + " over 3 seeds"};
}

Outcome addressee_changes_output() {
    const auto& pm = persona_models();
    const auto& m = pm.conditioned.front();
    std::size_t differ = 0;
    for (const auto& p : pm.corpus.probes) {
        const auto a = nrg::beam_search(p.query, p.e_q, p.e_r_a, m, {1, 20, 1});
        const auto b = nrg::beam_search(p.query, p.e_q, p.e_r_b, m, {1, 20, 1});
        if (a.front().tokens != b.front().tokens) ++differ;
    }
    const double share = static_cast<double>(differ) / static_cast<double>(pm.corpus.probes.size());
    return {share >= 0.8, std::to_string(differ) + "/" + std::to_string(pm.corpus.probes.size()) +
                              " probes change their greedy reply with the responder"};
}

// 8 ----------------------------------------------------------------------------

Outcome bm25_brute_force() {
    std::mt19937_64 rng(8);
    std::vector<std::string> words;
    for (int i = 0; i < 300; ++i) words.push_back("w" + std::to_string(i));
    // skewed word frequencies so document frequencies vary widely
    std::vector<double> weights;
    for (int i = 0; i < 300; ++i) weights.push_back(1.0 / (1.0 + i));
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    std::uniform_int_distribution<int> len(1, 30);
    std::vector<std::string> docs;
    std::vector<std::vector<std::string>> doc_tokens;
    for (int d = 0; d < 1000; ++d) {
        std::vector<std::string> toks;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) toks.push_back(words[static_cast<std::size_t>(pick(rng))]);
        std::string s;
        for (const auto& t : toks) s += (s.empty() ? "" : " ") + t;
        docs.push_back(s);
        doc_tokens.push_back(toks);
    }
    const auto t0 = Wall::now();
    const auto idx = retrieval::InvertedIndex::build(docs);
    const double build_s = seconds_since(t0);

    std::size_t order_mismatch = 0;
    double worst = 0.0;
    std::uniform_int_distribution<int> qlen(1, 5), any(0, 319);
    for (int q = 0; q < 60; ++q) {
        std::vector<std::string> terms;
        const int n = qlen(rng);
        // some queries repeat terms or use words absent from the corpus
        for (int i = 0; i < n; ++i) {
            const int w = any(rng);
            terms.push_back(w < 300 ? words[static_cast<std::size_t>(w)] : "zz" + std::to_string(w));
        }
        if (q % 7 == 0) terms.push_back(terms.front());
        std::string query;
        for (const auto& t : terms) query += (query.empty() ? "" : " ") + t;
        const auto want = oracle::bm25_search(doc_tokens, terms);
        const auto got = idx.keyword_search(query, docs.size());
        if (want.size() != got.size()) {
            ++order_mismatch;
            continue;
        }
        for (std::size_t i = 0; i < want.size(); ++i) {
            if (want[i].doc != got[i].doc) ++order_mismatch;
            worst = std::max(worst, std::abs(want[i].score - got[i].score));
        }
    }
    return {order_mismatch == 0 && worst <= 1e-9 && build_s < 5.0,
            "60 queries over 1000 records: " + std::to_string(order_mismatch) + " order mismatches, max score error " +
                fmt(worst) + ", build " + fmt(build_s) + " s"};
}

// 9 ----------------------------------------------------------------------------

Outcome kg_brute_force() {
    std::mt19937_64 rng(9);
    std::vector<std::string> topics;
    for (int i = 0; i < 40; ++i) {
        std::string t = "topic" + std::to_string(i);
        if (i % 4 == 0) t += " land";             // multi-word topics
        if (i % 10 == 0) t = "big " + t;          // some extend another topic's phrase
        topics.push_back(t);
    }
    std::vector<double> weights;
    for (int i = 0; i < 40; ++i) weights.push_back(1.0 / (1.0 + i % 13));
    std::discrete_distribution<int> pick_topic(weights.begin(), weights.end());
    std::uniform_int_distribution<int> mentions(0, 3), filler(0, 49), nfill(2, 8);
    std::vector<std::string> convs;
    for (int p = 0; p < 5000; ++p) {
        std::string s;
        const int m = mentions(rng);
        for (int i = 0; i < m; ++i) {
            const int f = nfill(rng);
            for (int j = 0; j < f; ++j) s += "f" + std::to_string(filler(rng)) + " ";
            s += topics[static_cast<std::size_t>(pick_topic(rng))] + " ";
        }
        s += "end";
        convs.push_back(s);
    }
    std::vector<kg::KgTriple> triples;
    std::uniform_int_distribution<int> any(0, 39), rel(0, 4);
    for (int i = 0; i < 400; ++i) {
        triples.push_back({topics[static_cast<std::size_t>(any(rng))], "r" + std::to_string(rel(rng)),
                           topics[static_cast<std::size_t>(any(rng))]});
    }
    for (int i = 0; i < 20; ++i) triples.push_back(triples[static_cast<std::size_t>(i * 7)]);  // duplicates

    std::string detail;
    bool ok = true;
    for (std::size_t threshold : {1u, 3u, 10u}) {
        const auto want = oracle::kg_retained(triples, convs, threshold);
        const auto graph = kg::KnowledgeGraph::build(triples, convs, threshold);
        const std::set<kg::KgTriple> got(graph.triples().begin(), graph.triples().end());
        const bool same = got == want && graph.triples().size() == got.size();
        ok = ok && same;
        detail += (detail.empty() ? "" : ", ") + std::string("threshold ") + std::to_string(threshold) + ": " +
                  std::to_string(got.size()) + (same ? " = " : " != ") + std::to_string(want.size());
    }
    return {ok, "retained triples over 5000 records, " + detail};
}

// 10 ---------------------------------------------------------------------------

class RandomGenerator final : public chat::CandidateGenerator {
public:
    RandomGenerator(CandidateSource src, std::size_t max_n, std::uint64_t seed) : src_(src), max_n_(max_n), rng_(seed) {}
    CandidateSource source() const override { return src_; }
    std::string name() const override { return std::string(to_string(src_)); }
    std::vector<ResponseCandidate> generate(const DialogueState&) const override {
        static const std::vector<std::string> vocab = {"music", "great", "i", "love", "the", "city", "you",
                                                       "food", "really", "nice", "beijing", "today"};
        std::uniform_int_distribution<std::size_t> count(0, max_n_), word(0, vocab.size() - 1), len(1, 8);
        std::vector<ResponseCandidate> out(count(rng_));
        for (std::size_t i = 0; i < out.size(); ++i) {
            std::string t = std::string(to_string(src_)) + std::to_string(serial_++);
            const std::size_t n = len(rng_);
            for (std::size_t j = 0; j < n; ++j) t += " " + vocab[word(rng_)];
            out[i].text = t;
            out[i].source = src_;
            out[i].provenance = std::to_string(i);
        }
        return out;
    }

private:
    CandidateSource src_;
    std::size_t max_n_;
    mutable std::mt19937_64 rng_;
    mutable std::size_t serial_ = 0;
};

/// Uniform scores below a per-turn ceiling, so some turns have no viable candidate.
class RandomRanker final : public chat::ResponseRanker {
public:
    explicit RandomRanker(std::uint64_t seed) : rng_(seed) {}
    double score(const FeatureVector&) const override { return std::uniform_real_distribution<double>(0.0, ceiling)(rng_); }
    std::string name() const override { return "random"; }
    double ceiling = 2.0;

private:
    mutable std::mt19937_64 rng_;
};

Outcome core_chat_invariants() {
    const auto res = fixtures::shipped();
    std::vector<std::shared_ptr<const chat::CandidateGenerator>> gens = {
        std::make_shared<RandomGenerator>(CandidateSource::Paired, 700, 1),
        std::make_shared<RandomGenerator>(CandidateSource::Unpaired, 700, 2),
        std::make_shared<RandomGenerator>(CandidateSource::Neural, 40, 3)};
    auto ranker = std::make_shared<RandomRanker>(10);
    const std::vector<double> thresholds = {0.5, 1.0, 1.5};
    std::vector<std::unique_ptr<chat::CoreChat>> chats;
    for (double th : thresholds) {
        chat::CoreChatConfig cfg;
        cfg.generators = gens;
        cfg.features = {res->empathy.get(), res->encoder.get(), res->bot, 3};
        cfg.ranker = {ranker, th};
        cfg.editorial = res->editorial.get();
        chats.push_back(std::make_unique<chat::CoreChat>(cfg));
    }
    const json pool = fixtures::load("eval/simulation.json").at("pool");
    const auto& no_candidate = res->editorial->texts(chat::EditorialReason::NoCandidate);
    std::mt19937_64 rng(100);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::size_t cap_violations = 0, threshold_violations = 0, editorial_violations = 0, editorial_turns = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::string q = pool.at(static_cast<std::size_t>(t) % pool.size()).get<std::string>();
        const WorkingMemory memory;
        const auto ann = res->empathy->annotate(q, memory, nullptr, res->bot, empathy::TopicDecision::keep());
        ranker->ceiling = coin(rng) < 0.3 ? 0.9 * thresholds[static_cast<std::size_t>(t) % 3] : 2.0;
        const auto& cc = *chats[static_cast<std::size_t>(t) % 3];
        const double th = thresholds[static_cast<std::size_t>(t) % 3];
        chat::ChatSessionState st;
        const auto out = cc.respond(ann.state, st, rng);
        std::map<CandidateSource, std::size_t> per;
        bool any_above = false;
        for (const auto& c : out.trace.candidates) {
            ++per[c.source];
            any_above = any_above || (c.rank_score && *c.rank_score > th);
        }
        for (const auto& [src, n] : per) cap_violations += n > chat::source_cap(src) ? 1 : 0;
        for (const auto& [name, n] : out.trace.per_source) {
            cap_violations += n > chat::source_cap(name == "neural" ? CandidateSource::Neural
                                                   : name == "unpaired" ? CandidateSource::Unpaired
                                                                        : CandidateSource::Paired)
                                  ? 1
                                  : 0;
        }
        if (out.trace.selected) {
            const auto& c = out.trace.candidates.at(*out.trace.selected);
            if (!(c.rank_score && *c.rank_score > th) || out.response != c.text) ++threshold_violations;
        }
        if (!any_above) {
            ++editorial_turns;
            const bool editorial = out.trace.selected_source == "editorial" && !out.trace.selected &&
                                   std::find(no_candidate.begin(), no_candidate.end(), out.response) != no_candidate.end();
            if (!editorial) ++editorial_violations;
        }
    }
    const bool ok = cap_violations == 0 && threshold_violations == 0 && editorial_violations == 0 && editorial_turns > 0;
    return {ok, "1000 turns: " + std::to_string(cap_violations) + " cap, " + std::to_string(threshold_violations) +
                    " threshold, " + std::to_string(editorial_violations) + " editorial violations (" +
                    std::to_string(editorial_turns) + " turns without a viable candidate)"};
}

// 11 ---------------------------------------------------------------------------

std::vector<ml::LabeledExample> random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t dims, bool graded) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> level(0, 2), coarse(0, 5);
    std::vector<ml::LabeledExample> data(n);
    for (auto& ex : data) {
        for (std::size_t f = 0; f < dims; ++f) ex.features.push_back(f % 2 == 0 ? u(rng) : coarse(rng));  // ties in odd features
        ex.label = graded ? level(rng) : std::sin(3.0 * ex.features[0]) + 0.3 * u(rng);
    }
    return data;
}

Outcome gbrt_checks() {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(10, 200), dims(1, 5), depth(1, 4);
    std::uniform_real_distribution<double> lr(0.05, 1.0);
    std::size_t increases = 0, stump_fail = 0;
    for (int t = 0; t < 50; ++t) {
        const auto data = random_dataset(rng, static_cast<std::size_t>(size(rng)), static_cast<std::size_t>(dims(rng)), t % 2 == 0);
        const auto model = ml::train_gbrt(data, {30, depth(rng), lr(rng), 1});
        const auto& loss = model.loss_history();
        for (std::size_t i = 1; i < loss.size(); ++i) increases += loss[i] > loss[i - 1] + 1e-12 ? 1 : 0;

        const auto stump = ml::train_gbrt(data, {1, 1, 1.0, 1});
        const auto want = oracle::best_stump(data);
        const double n = static_cast<double>(data.size());
        bool matched = std::abs(stump.loss_history().back() * n - want.sse) <= 1e-9 * std::max(1.0, want.sse);
        bool any_pred = false;
        for (const auto& pred : want.predictions) {
            bool same = true;
            for (std::size_t i = 0; i < data.size() && same; ++i) same = std::abs(stump.predict(data[i].features) - pred[i]) <= 1e-9;
            any_pred = any_pred || same;
        }
        if (!(matched && any_pred)) ++stump_fail;
    }
    return {increases == 0 && stump_fail == 0, "50 datasets: " + std::to_string(increases) +
                                                   " loss increases, " + std::to_string(stump_fail) +
                                                   " stumps differing from the exhaustive best split"};
}

// 12 ---------------------------------------------------------------------------

Outcome topic_manager() {
    const auto res = fixtures::shipped();
    const auto& emp = *res->empathy;
    auto state_of = [&](const std::string& q) {
        return emp.annotate(q, WorkingMemory{}, nullptr, res->bot, empathy::TopicDecision::keep()).state;
    };
    bool bland_ok = true;
    for (const std::string q : {"OK", "I see", "go on"}) {
        const auto d = dm::should_switch_topic(state_of(q), {}, emp);
        bland_ok = bland_ok && d.features.bland && d.switch_topic;
    }
    chat::TurnMeta editorial;
    editorial.editorial_used = true;
    const auto sw = dm::should_switch_topic(state_of("tell me about Beijing"), editorial, emp);
    const auto stay = dm::should_switch_topic(state_of("tell me about Beijing"), {}, emp);
    const bool editorial_ok = sw.switch_topic && sw.features.editorial_used && !stay.switch_topic;

    // 1000 random sessions through the engine; discussed topics are rebuilt from the logs
    auto clock = std::make_shared<ManualClock>(1'000'000);
    service::Engine engine(res, clock);
    const auto sim = fixtures::load("eval/simulation.json");
    std::vector<std::string> pool = sim.at("pool").get<std::vector<std::string>>();
    for (const char* b : {"ok", "I see", "go on", "boring"}) pool.push_back(b);
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), turns(2, 7);
    std::size_t switches = 0, violations = 0;
    for (int s = 0; s < 1000; ++s) {
        const auto sid = engine.create_session();
        std::set<std::string> discussed;
        const std::size_t n = turns(rng);
        for (std::size_t t = 0; t < n; ++t) {
            clock->advance(10'000);
            const auto reply = engine.chat_turn(sid, pool[pick(rng)]);
            const auto trace = *engine.get_trace(sid, *reply.turn);
            const auto line = engine.session_log(sid).turns.back();
            const std::string eq_topic = line.e_q.value("topic", "none");
            std::set<std::string> before = discussed;
            if (eq_topic != "none" && eq_topic != "unknown") before.insert(text::normalize(eq_topic));
            const auto& chosen = trace.at("topic_decision").at("topic");
            if (!chosen.is_null()) {
                ++switches;
                if (before.count(text::normalize(chosen.get<std::string>())) > 0) ++violations;
            }
            for (const auto* e : {&line.e_q, &line.e_r}) {
                const std::string topic = e->value("topic", "none");
                if (topic != "none" && topic != "unknown") discussed.insert(text::normalize(topic));
            }
        }
        engine.close_session(sid);
    }
    const bool ok = bland_ok && editorial_ok && violations == 0 && switches > 0;
    return {ok, std::string("bland cues ") + (bland_ok ? "switch" : "do not switch") + ", editorial " +
                    (editorial_ok ? "switches" : "does not switch") + ", " + std::to_string(switches) +
                    " recommendations in 1000 sessions, " + std::to_string(violations) + " repeat a discussed topic"};
}

// 13 ---------------------------------------------------------------------------

Outcome cps_checks() {
    const double small = service::compute_cps(std::vector<std::size_t>{5, 9, 10});

    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> nturns(0, 40), user(0, 499);
    std::uniform_int_distribution<TimestampMs> start(0, 1'000'000'000);
    std::vector<service::SessionLog> logs;
    for (int i = 0; i < 10'000; ++i) {
        service::SessionLog s;
        s.session_id = "s-" + std::to_string(i);
        s.user_id = i % 9 == 0 ? "" : "u" + std::to_string(user(rng));
        s.started_ms = start(rng);
        const int n = nturns(rng);
        for (int t = 0; t < n; ++t) {
            service::TurnLogLine l;
            l.session_id = s.session_id;
            l.index = static_cast<std::size_t>(t);
            l.ts_ms = s.started_ms + t;
            s.turns.push_back(l);
        }
        logs.push_back(std::move(s));
    }
    bool agg_ok = true;
    for (auto [from, to] : std::vector<std::pair<std::optional<TimestampMs>, std::optional<TimestampMs>>>{
             {std::nullopt, std::nullopt}, {250'000'000, 750'000'000}, {std::nullopt, 100'000'000}}) {
        const auto want = oracle::metrics(logs, from, to);
        const auto got = service::compute_metrics(logs, {from, to});
        agg_ok = agg_ok && got.session_count == want.sessions && got.turn_count == want.turns &&
                 got.histogram == want.histogram && got.nau == want.users.size() &&
                 std::abs(got.cps - want.cps()) <= 1e-12;
    }
    std::size_t total = 0;
    for (const auto& s : logs) total += s.turns.size();
    agg_ok = agg_ok && std::abs(service::compute_cps(logs) - static_cast<double>(total) / 10'000.0) <= 1e-12;

    const auto res = fixtures::shipped();
    const auto script = service::UserScript::load(fixtures::data_dir() / "eval" / "simulation.json");
    const auto a = service::simulate_sessions(res, script, 25, 5);
    const auto b = service::simulate_sessions(res, script, 25, 5);
    std::string da, db;
    for (const auto& s : a) da += s.to_json().dump();
    for (const auto& s : b) db += s.to_json().dump();
    const bool repro = a == b && da == db;
    return {small == 8.0 && agg_ok && repro, "cps([5,9,10]) = " + fmt(small) + ", 10k-log aggregate " +
                                                 (agg_ok ? "matches" : "differs from") + " the oracle, simulation " +
                                                 (repro ? "reproduces bit for bit" : "is not reproducible")};
}

// 14 ---------------------------------------------------------------------------

Outcome coverage_checks() {
    auto res = std::make_shared<service::Resources>(*fixtures::shipped());
    auto model = std::make_shared<const nrg::NrgModel>(store_model().model);
    res->nrg = model;
    res->generators["neural"] = std::make_shared<chat::NeuralGenerator>(model, res->config.beam);
    const auto queries = service::load_coverage_set(fixtures::data_dir() / "eval" / "coverage.jsonl");
    const std::vector<std::string> all = {"paired", "unpaired", "neural"};
    std::map<unsigned, service::CoverageReport> by_mask;
    for (unsigned mask = 0; mask < 8; ++mask) {
        std::vector<std::string> names;
        for (unsigned i = 0; i < 3; ++i) {
            if (mask & (1u << i)) names.push_back(all[i]);
        }
        by_mask[mask] = service::response_coverage(*res, names, queries, service::keyword_judge);
    }
    std::size_t decreases = 0;
    for (unsigned s = 0; s < 8; ++s) {
        for (unsigned t = 0; t < 8; ++t) {
            if ((s & t) != s) continue;
            for (std::size_t q = 0; q < queries.size(); ++q) {
                decreases += by_mask[t].per_query[q] < by_mask[s].per_query[q] ? 1 : 0;
            }
        }
    }
    const std::size_t paired = by_mask[1].total, hybrid = by_mask[7].total;
    return {hybrid > paired && decreases == 0,
            std::to_string(queries.size()) + " queries: hybrid " + std::to_string(hybrid) + " vs paired-only " +
                std::to_string(paired) + ", " + std::to_string(decreases) + " superset decreases"};
}

// 15 ---------------------------------------------------------------------------

Outcome timeout_checks() {
    const auto res = fixtures::shipped();
    const TimestampMs t0 = 5'000'000;
    auto clock = std::make_shared<ManualClock>(t0);
    service::Engine engine(res, clock);
    const auto sid = engine.create_session({"u1", std::nullopt});
    engine.chat_turn(sid, "hi");
    clock->set(t0 + 20 * 60'000);
    engine.chat_turn(sid, "tell me about Beijing");
    clock->set(t0 + 30 * 60'000 + 1);
    const auto late = engine.chat_turn(sid, "are you still there?");
    const auto log = engine.session_log(sid);
    bool rejected = false;
    try {
        engine.chat_turn(sid, "hello?");
    } catch (const service::SessionClosed&) {
        rejected = true;
    }
    bool boundary_ok = log.turns.size() == 2;
    for (const auto& l : log.turns) boundary_ok = boundary_ok && l.ts_ms - log.started_ms <= res->config.timeout_ms();

    // randomized gaps: no recorded turn ever lies past the boundary
    std::mt19937_64 rng(15);
    std::uniform_int_distribution<TimestampMs> gap(30'000, 9 * 60'000);
    std::size_t late_turns = 0, timeouts = 0;
    for (int s = 0; s < 50; ++s) {
        clock->set(t0 + (s + 1) * 86'400'000LL);
        const auto id = engine.create_session();
        for (int t = 0; t < 12; ++t) {
            const auto r = engine.chat_turn(id, t % 2 == 0 ? "do you like music?" : "tell me more");
            if (r.closed) {
                ++timeouts;
                break;
            }
            clock->advance(gap(rng));
        }
        const auto l = engine.session_log(id);
        for (const auto& line : l.turns) late_turns += line.ts_ms - l.started_ms > res->config.timeout_ms() ? 1 : 0;
    }
    const bool ok = late.closed && late.close_reason == service::CloseReason::Timeout && !late.turn &&
                    log.closed && log.close_reason == service::CloseReason::Timeout && rejected && boundary_ok &&
                    late_turns == 0 && timeouts > 0;
    return {ok, std::string("crossing session closed with reason ") +
                    (log.close_reason ? std::string(service::to_string(*log.close_reason)) : "none") + ", " +
                    std::to_string(log.turns.size()) + " turns kept, " + std::to_string(timeouts) +
                    " random sessions timed out with " + std::to_string(late_turns) + " turns past the boundary"};
}

// 16 ---------------------------------------------------------------------------

Outcome fixture_checks() {
    const auto res = fixtures::shipped();
    const auto& emp = *res->empathy;

    // pronoun resolution over a scripted dialogue
    const auto dialogue = fixtures::load("fixtures/pronoun_dialogue.json");
    WorkingMemory memory;
    std::size_t qc_ok = 0, qc_total = 0;
    std::string got_him;
    TimestampMs ts = 1000;
    for (const auto& turn : dialogue.at("turns")) {
        const std::string user = turn.at("user");
        const std::string bot = turn.at("bot");
        const auto rw = emp.contextual_rewrite(user, memory);
        if (turn.contains("expect_qc")) {
            ++qc_total;
            qc_ok += rw.qc == turn.at("expect_qc").get<std::string>() ? 1 : 0;
            for (const auto& sub : rw.substitutions) {
                if (sub.pronoun == "him") got_him = sub.replacement;
            }
        }
        TurnAnnotations a;
        a.qc = rw.qc;
        a.e_q = emp.understand_user(rw.qc, memory, nullptr);
        a.user_entities = rw.entities;
        a.bot_entities = emp.detect_entities(bot);
        memory = tracker_update(std::move(memory), user, bot, std::move(a), ts += 1000);
    }

    // graph expansion and echo demotion
    const auto g = fixtures::load("fixtures/beijing_graph.json");
    std::vector<std::string> convs;
    for (const auto& p : g.at("paired")) convs.push_back(p.at("query").get<std::string>() + "\n" + p.at("response").get<std::string>());
    std::vector<kg::KgTriple> triples;
    for (const auto& t : g.at("triples")) triples.push_back({t.at(0), t.at(1), t.at(2)});
    auto graph = std::make_shared<const kg::KnowledgeGraph>(
        kg::KnowledgeGraph::build(triples, convs, g.at("threshold").get<std::size_t>()));
    std::vector<kg::UnpairedRecord> recs;
    for (const auto& s : g.at("unpaired")) recs.push_back(service::annotate_sentence({s.get<std::string>(), {}}, emp));
    auto index = std::make_shared<const kg::UnpairedIndex>(kg::UnpairedIndex::build(recs));
    chat::UnpairedGenerator gen(index, graph, res->lexicons, kg::RelatedTopicContext{}, res->bot);
    const std::string query = g.at("query");
    const auto [topics, related] = gen.expansion(query);
    std::set<std::string> related_set(related.begin(), related.end());
    const auto want_related = g.at("expected_related").get<std::set<std::string>>();

    const auto state = emp.annotate(query, WorkingMemory{}, nullptr, res->bot, empathy::TopicDecision::keep()).state;
    const auto cands = gen.generate(state);
    const std::string echo = g.at("echo");
    std::optional<std::size_t> echo_pos, first_other;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (text::normalize(cands[i].text) == text::normalize(echo)) echo_pos = i;
        else if (!first_other) first_other = i;
    }
    const bool echo_ok = first_other && (!echo_pos || (*first_other < *echo_pos &&
                                                       cands[*first_other].generator_score > cands[*echo_pos].generator_score));

    const bool ok = qc_total > 0 && qc_ok == qc_total && got_him == "Ashin" && related_set == want_related && echo_ok;
    std::string rel;
    for (const auto& r : related) rel += (rel.empty() ? "" : ", ") + r;
    return {ok, "him -> " + (got_him.empty() ? std::string("(none)") : got_him) + ", " + std::to_string(qc_ok) + "/" +
                    std::to_string(qc_total) + " rewrites, Beijing -> {" + rel + "}, " +
                    (echo_ok ? "non-echo sentence ranks above the echo" : "echo not demoted")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
        {"GRU gradients match finite differences", gradient_check},
        {"output softmax sums to one", softmax_sums},
        {"gated update bounds", gru_bounds},
        {"beam search versus exhaustive and greedy decoding", beam_exhaustive},
        {"generator training on 200 pairs", training_converges},
        {"empathy conditioning lowers heldout perplexity", conditioning_helps},
        {"responder empathy changes the reply", addressee_changes_output},
        {"BM25 versus brute force", bm25_brute_force},
        {"knowledge-graph filtering versus brute force", kg_brute_force},
        {"candidate caps, threshold and editorial fallback", core_chat_invariants},
        {"boosted trees: monotone loss and exact stumps", gbrt_checks},
        {"topic manager switching and recommendation", topic_manager},
        {"conversation-turns-per-session metric", cps_checks},
        {"hybrid response coverage", coverage_checks},
        {"session timeout", timeout_checks},
        {"dialogue fixtures", fixture_checks},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && only.count(id) == 0) continue;
        const auto t0 = Wall::now();
        Outcome o;
        try {
            o = checks[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %2d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, checks[i].first.c_str(), o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
