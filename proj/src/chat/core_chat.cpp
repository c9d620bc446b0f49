#include "socialbot/chat/core_chat.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "socialbot/util/text.hpp"

namespace socialbot::chat {

std::size_t source_cap(CandidateSource s) {
    switch (s) {
        case CandidateSource::Paired: return kPairedCap;
        case CandidateSource::Unpaired: return kUnpairedCap;
        case CandidateSource::Neural: return kNeuralCap;
    }
    return 0;
}

// Generators -----------------------------------------------------------------

PairedGenerator::PairedGenerator(std::shared_ptr<const retrieval::PairedIndex> index,
                                 std::shared_ptr<const ml::DualEncoder> encoder, PersonaProfile bot,
                                 retrieval::PairedRetrievalParams params)
    : index_(std::move(index)), encoder_(std::move(encoder)), bot_(std::move(bot)), params_(params) {
    params_.cap = std::min(params_.cap, kPairedCap);
}

std::vector<ResponseCandidate> PairedGenerator::generate(const DialogueState& s) const {
    if (!index_) return {};
    return retrieval::retrieve_paired(*index_, encoder_.get(), s.qc, bot_, params_);
}

UnpairedGenerator::UnpairedGenerator(std::shared_ptr<const kg::UnpairedIndex> index,
                                     std::shared_ptr<const kg::KnowledgeGraph> graph,
                                     std::shared_ptr<const empathy::Lexicons> lexicons,
                                     kg::RelatedTopicContext related, PersonaProfile bot, kg::UnpairedParams params)
    : index_(std::move(index)),
      graph_(std::move(graph)),
      lexicons_(std::move(lexicons)),
      related_(related),
      bot_(std::move(bot)),
      params_(params) {
    params_.cap = std::min(params_.cap, kUnpairedCap);
}

std::pair<std::vector<std::string>, std::vector<std::string>> UnpairedGenerator::expansion(const std::string& qc) const {
    std::vector<std::string> topics;
    std::vector<std::string> related;
    if (lexicons_) topics = kg::extract_topics(qc, *lexicons_);
    if (graph_) {
        kg::RelatedTopicContext ctx = related_;
        ctx.qc = qc;
        for (const auto& t : topics) {
            for (auto& r : kg::related_topics(*graph_, t, ctx)) {
                if (std::find(topics.begin(), topics.end(), r.topic) == topics.end() &&
                    std::find(related.begin(), related.end(), r.topic) == related.end()) {
                    related.push_back(std::move(r.topic));
                }
            }
        }
    }
    return {topics, related};
}

std::vector<ResponseCandidate> UnpairedGenerator::generate(const DialogueState& s) const {
    if (!index_) return {};
    auto [topics, related] = expansion(s.qc);
    return kg::retrieve_unpaired(*index_, s.qc, topics, related, bot_, lexicons_.get(), params_);
}

NeuralGenerator::NeuralGenerator(std::shared_ptr<const nrg::NrgModel> model, nrg::BeamParams params)
    : model_(std::move(model)), params_(params) {
    params_.max_results = std::min(params_.max_results, kNeuralCap);
}

std::vector<ResponseCandidate> NeuralGenerator::generate(const DialogueState& s) const {
    if (!model_) return {};
    return nrg::beam_generate(s.qc, s.e_q, s.e_r, *model_, params_);
}

namespace {

int source_rank(CandidateSource s) {
    switch (s) {
        case CandidateSource::Paired: return 0;
        case CandidateSource::Unpaired: return 1;
        case CandidateSource::Neural: return 2;
    }
    return 3;
}

}  // namespace

GenerationResult generate_candidates(const DialogueState& s,
                                     const std::vector<std::shared_ptr<const CandidateGenerator>>& generators) {
    GenerationResult out;
    std::vector<std::shared_ptr<const CandidateGenerator>> ordered = generators;
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        return source_rank(a->source()) < source_rank(b->source());
    });
    std::set<std::string> seen;
    for (const auto& g : ordered) {
        std::vector<ResponseCandidate> got;
        try {
            got = g->generate(s);
        } catch (const std::exception& e) {
            out.failures.push_back({g->name(), e.what()});
            continue;
        } catch (...) {
            out.failures.push_back({g->name(), "unknown error"});
            continue;
        }
        const std::size_t cap = source_cap(g->source());
        std::size_t kept = 0;
        for (auto& c : got) {
            if (kept == cap) break;
            ++kept;
            c.source = g->source();
            const std::string key = text::normalize(c.text);
            if (key.empty() || !seen.insert(key).second) continue;
            out.candidates.push_back(std::move(c));
        }
        out.per_source[g->name()] += kept;
    }
    return out;
}

// Features -------------------------------------------------------------------

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {
        "cohesion_cosine",   "cohesion_overlap",   "coherence_cosine",    "coherence_overlap",
        "empathy_topic",     "empathy_intent",     "empathy_sentiment",   "empathy_opinion",
        "empathy_agreement", "empathy_dense_cosine", "retrieval_bm25",    "retrieval_tfidf",
        "retrieval_cosine",  "retrieval_present"};
    return names;
}

double bow_cosine(const std::string& a, const std::string& b) {
    std::map<std::string, double> ca;
    std::map<std::string, double> cb;
    for (const auto& w : text::words(a)) ca[w] += 1.0;
    for (const auto& w : text::words(b)) cb[w] += 1.0;
    if (ca.empty() || cb.empty()) return 0.0;
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [w, x] : ca) {
        na += x * x;
        if (auto it = cb.find(w); it != cb.end()) dot += x * it->second;
    }
    for (const auto& [w, y] : cb) nb += y * y;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double content_overlap(const std::string& a, const std::string& b, const empathy::Lexicons* lexicons) {
    return kg::echo_overlap(a, b, lexicons);
}

FeatureExtractor::FeatureExtractor(const FeatureContext& ctx, const DialogueState& s) : ctx_(ctx), s_(s) {
    if (s.context) reply_memory_ = *s.context;
    // the candidate answers qc, so qc becomes the latest utterance of its context
    auto ann = std::make_shared<TurnAnnotations>();
    ann->e_q = s.e_q;
    ann->e_r = s.e_r;
    ann->qc = s.qc;
    Turn pseudo;
    pseudo.index = reply_memory_.turns.size();
    pseudo.user_text = s.qc;
    pseudo.annotations = std::move(ann);
    reply_memory_.turns.push_back(std::move(pseudo));

    if (s.context) {
        const auto& turns = s.context->turns;
        const std::size_t from = turns.size() > ctx.context_turns ? turns.size() - ctx.context_turns : 0;
        for (std::size_t i = from; i < turns.size(); ++i) {
            context_text_ += turns[i].user_text + " " + turns[i].bot_text + " ";
        }
    }
    context_text_ += s.qc;
}

double FeatureExtractor::similarity(const std::string& a, const std::string& b) const {
    return ctx_.pair_encoder != nullptr ? ctx_.pair_encoder->similarity(a, b) : bow_cosine(a, b);
}

EmpathyVector FeatureExtractor::candidate_empathy(const std::string& s) const {
    return ctx_.empathy->understand_user(s, reply_memory_, &ctx_.bot);
}

FeatureVector FeatureExtractor::features(const ResponseCandidate& c) const {
    const empathy::Lexicons* lex = ctx_.empathy != nullptr ? &ctx_.empathy->lexicons() : nullptr;
    FeatureVector f;
    f.names = feature_names();
    f.values.reserve(f.names.size());
    f.values.push_back(similarity(s_.qc, c.text));
    f.values.push_back(content_overlap(c.text, s_.qc, lex));
    f.values.push_back(similarity(context_text_, c.text));
    f.values.push_back(content_overlap(c.text, context_text_, lex));

    if (ctx_.empathy != nullptr) {
        const EmpathyVector e = candidate_empathy(c.text);
        static const std::vector<std::string> keys = {"topic",  "intent", "sentiment", "opinion",    "gender",
                                                      "age",    "interests", "occupation", "personality"};
        std::size_t agree = 0;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const bool same = e.get(keys[i]) == s_.e_r.get(keys[i]);
            if (i < 4) f.values.push_back(same ? 1.0 : 0.0);
            agree += same ? 1 : 0;
        }
        f.values.push_back(static_cast<double>(agree) / static_cast<double>(keys.size()));
        double dot = 0.0;
        double na = 0.0;
        double nb = 0.0;
        const std::size_t n = std::min(e.dense.size(), s_.e_r.dense.size());
        for (std::size_t i = 0; i < n; ++i) {
            dot += e.dense[i] * s_.e_r.dense[i];
            na += e.dense[i] * e.dense[i];
            nb += s_.e_r.dense[i] * s_.e_r.dense[i];
        }
        f.values.push_back(na > 0 && nb > 0 ? std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0) : 0.0);
    } else {
        for (int i = 0; i < 6; ++i) f.values.push_back(0.0);
    }

    if (c.retrieval.present) {
        f.values.push_back(c.retrieval.bm25);
        f.values.push_back(c.retrieval.tfidf);
        f.values.push_back(c.retrieval.cosine);
        f.values.push_back(1.0);
    } else {
        for (int i = 0; i < 4; ++i) f.values.push_back(0.0);
    }
    return f;
}

// Ranking --------------------------------------------------------------------

GbrtRanker::GbrtRanker(std::shared_ptr<const ml::GbrtModel> model) : model_(std::move(model)) {
    if (!model_ || model_->num_features() != feature_names().size()) {
        throw std::invalid_argument("GbrtRanker: model must take " + std::to_string(feature_names().size()) + " features");
    }
}

double GbrtRanker::score(const FeatureVector& f) const { return model_->predict(f.values); }

double HeuristicRanker::score(const FeatureVector& f) const {
    const auto& v = f.values;
    // relevance to the query dominates; empathy agreement only separates relevant candidates
    const double semantic = std::max(0.0, v[12] - 0.3) / 0.7;
    double s = 1.2 * v[0] + 0.4 * v[2] + 0.4 * v[3] + 0.2 * v[4] + 0.2 * v[8] + 0.1 * v[9] + 0.8 * v[13] * semantic;
    // near-verbatim echoes of the query are penalised
    s -= 2.0 * std::max(0.0, v[1] - 0.7);
    return std::clamp(s, 0.0, 2.0);
}

Selection rank_and_select(std::vector<ResponseCandidate>& candidates, const RankerConfig& config, std::mt19937_64& rng) {
    if (!config.ranker) throw std::invalid_argument("rank_and_select: no ranker");
    Selection sel;
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double sc = config.ranker->score(candidates[i].features);
        candidates[i].rank_score = sc;
        if (sc > config.threshold) eligible.push_back(i);
    }
    sel.eligible = eligible.size();
    if (eligible.empty()) return sel;
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    sel.index = eligible[pick(rng)];
    sel.score = *candidates[sel.index].rank_score;
    sel.valid = true;
    return sel;
}

// Editorial ------------------------------------------------------------------

std::string_view to_string(EditorialReason r) {
    switch (r) {
        case EditorialReason::NoCandidate: return "no_candidate";
        case EditorialReason::ModelFailure: return "model_failure";
        case EditorialReason::Timeout: return "timeout";
        case EditorialReason::ImproperInput: return "improper_input";
    }
    return "no_candidate";
}

EditorialSet EditorialSet::load(const std::filesystem::path& path) { return from_json(load_json(path)); }

EditorialSet EditorialSet::from_json(const json& j) {
    EditorialSet e;
    for (auto r : {EditorialReason::NoCandidate, EditorialReason::ModelFailure, EditorialReason::Timeout,
                   EditorialReason::ImproperInput}) {
        const std::string key(to_string(r));
        if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
            throw DataError("editorial set needs a non-empty list for " + key);
        }
        e.sets_[r] = j.at(key).get<std::vector<std::string>>();
    }
    return e;
}

const std::vector<std::string>& EditorialSet::texts(EditorialReason r) const { return sets_.at(r); }

std::string EditorialSet::next(EditorialReason r, std::size_t& counter) const {
    const auto& list = sets_.at(r);
    const std::string& s = list[counter % list.size()];
    ++counter;
    return s;
}

// Trace ----------------------------------------------------------------------

json TurnTrace::to_json() const {
    json cands = json::array();
    for (const auto& c : candidates) cands.push_back(socialbot::to_json(c));
    json fails = json::array();
    for (const auto& f : failures) fails.push_back({{"generator", f.generator}, {"message", f.message}});
    json j{{"query", query},
           {"qc", qc},
           {"e_q", socialbot::to_json(e_q)},
           {"e_r", socialbot::to_json(e_r)},
           {"candidates", cands},
           {"failures", fails},
           {"suppressed_repeats", suppressed_repeats},
           {"per_source", per_source},
           {"selected", selected ? json(*selected) : json(nullptr)},
           {"selected_source", selected_source},
           {"rank_score", rank_score ? json(*rank_score) : json(nullptr)},
           {"editorial", editorial ? json(std::string(to_string(*editorial))) : json(nullptr)},
           {"ranker", ranker},
           {"threshold", threshold},
           {"meta",
            {{"editorial_used", meta.editorial_used},
             {"repeats_input", meta.repeats_input},
             {"no_new_info", meta.no_new_info}}}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
}

// Core Chat ------------------------------------------------------------------

CoreChat::CoreChat(CoreChatConfig config) : config_(std::move(config)) {
    if (!config_.ranker.ranker) config_.ranker.ranker = std::make_shared<HeuristicRanker>();
    if (config_.editorial == nullptr) throw std::invalid_argument("CoreChat: editorial set required");
    if (!std::isfinite(config_.ranker.threshold)) throw std::invalid_argument("CoreChat: threshold must be finite");
}

CoreChatResult CoreChat::respond(const DialogueState& s, ChatSessionState& session, std::mt19937_64& rng) const {
    CoreChatResult out;
    TurnTrace& tr = out.trace;
    tr.query = s.query;
    tr.qc = s.qc;
    tr.e_q = s.e_q;
    tr.e_r = s.e_r;
    tr.ranker = config_.ranker.ranker->name();
    tr.threshold = config_.ranker.threshold;
    const empathy::Lexicons* lex = config_.features.empathy != nullptr ? &config_.features.empathy->lexicons() : nullptr;

    auto editorial = [&](EditorialReason r) {
        tr.editorial = r;
        tr.selected_source = "editorial";
        out.response = config_.editorial->next(r, session.editorial_counters[r]);
    };

    if (config_.features.empathy != nullptr && config_.features.empathy->is_improper(s.qc)) {
        editorial(EditorialReason::ImproperInput);
    } else {
        const auto started = std::chrono::steady_clock::now();
        GenerationResult gen = generate_candidates(s, config_.generators);
        tr.failures = gen.failures;
        tr.per_source = gen.per_source;

        std::set<std::string> recent;
        for (const auto& b : session.recent_bot) recent.insert(text::normalize(b));
        for (auto& c : gen.candidates) {
            if (recent.count(text::normalize(c.text)) > 0) {
                tr.suppressed_repeats.push_back(c.text);
                continue;
            }
            tr.candidates.push_back(std::move(c));
        }

        FeatureExtractor fx(config_.features, s);
        for (auto& c : tr.candidates) c.features = fx.features(c);
        const Selection sel = rank_and_select(tr.candidates, config_.ranker, rng);
        const double elapsed =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

        if (config_.time_budget_ms > 0.0 && elapsed > config_.time_budget_ms) {
            editorial(EditorialReason::Timeout);
        } else if (!config_.generators.empty() && gen.failures.size() == config_.generators.size()) {
            editorial(EditorialReason::ModelFailure);
        } else if (!sel.valid) {
            editorial(EditorialReason::NoCandidate);
        } else {
            tr.selected = sel.index;
            tr.rank_score = sel.score;
            tr.selected_source = std::string(to_string(tr.candidates[sel.index].source));
            out.response = tr.candidates[sel.index].text;
        }
    }

    tr.meta = assess_turn(s, out.response, tr.editorial.has_value(), lex);
    session.recent_bot.push_back(out.response);
    while (session.recent_bot.size() > config_.repetition_window) session.recent_bot.pop_front();
    return out;
}

TurnMeta assess_turn(const DialogueState& s, const std::string& response, bool editorial_used,
                     const empathy::Lexicons* lexicons) {
    TurnMeta m;
    m.editorial_used = editorial_used;
    auto content = [&](const std::string& t) {
        return lexicons != nullptr ? lexicons->content_words(t) : text::words(t);
    };

    std::set<std::string> history;
    std::string previous_user;
    if (s.context && !s.context->turns.empty()) {
        for (const auto& t : s.context->turns) {
            for (auto& w : content(t.user_text + " " + t.bot_text)) history.insert(std::move(w));
        }
        previous_user = s.context->turns.back().user_text;
    }

    const bool user_repeats = !previous_user.empty() && text::normalize(previous_user) == text::normalize(s.query);
    const auto reply_words = content(response);
    const bool reply_echoes = !editorial_used && !reply_words.empty() && content_overlap(response, s.qc, lexicons) >= 0.8;
    m.repeats_input = user_repeats || reply_echoes;

    const auto query_words = content(s.qc);
    const bool user_stale = !history.empty() && !query_words.empty() &&
                            std::all_of(query_words.begin(), query_words.end(),
                                        [&](const std::string& w) { return history.count(w) > 0; });
    const bool reply_stale = !editorial_used && !history.empty() && !reply_words.empty() &&
                             std::all_of(reply_words.begin(), reply_words.end(),
                                         [&](const std::string& w) { return history.count(w) > 0; });
    m.no_new_info = user_stale || reply_stale;
    return m;
}

}  // namespace socialbot::chat
