#include <gtest/gtest.h>

#include <cmath>

#include "../support/fixtures.hpp"
#include "socialbot/chat/core_chat.hpp"
#include "socialbot/util/text.hpp"

using namespace socialbot;
using namespace socialbot::chat;

namespace {

class FixedGenerator final : public CandidateGenerator {
public:
    FixedGenerator(CandidateSource src, std::vector<std::string> texts, bool fail = false)
        : src_(src), texts_(std::move(texts)), fail_(fail) {}
    CandidateSource source() const override { return src_; }
    std::string name() const override { return std::string(to_string(src_)); }
    std::vector<ResponseCandidate> generate(const DialogueState&) const override {
        if (fail_) throw std::runtime_error("injected failure");
        std::vector<ResponseCandidate> out;
        for (const auto& t : texts_) {
            ResponseCandidate c;
            c.text = t;
            c.source = src_;
            out.push_back(c);
        }
        return out;
    }

private:
    CandidateSource src_;
    std::vector<std::string> texts_;
    bool fail_;
};

class ConstRanker final : public ResponseRanker {
public:
    explicit ConstRanker(double s) : s_(s) {}
    double score(const FeatureVector&) const override { return s_; }
    std::string name() const override { return "const"; }

private:
    double s_;
};

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + " " + std::to_string(i));
    return v;
}

DialogueState state_of(const std::string& q, const WorkingMemory& m = {}) {
    return fixtures::shipped()->empathy->annotate(q, m, nullptr, fixtures::shipped()->bot, empathy::TopicDecision::keep()).state;
}

CoreChat make_chat(std::vector<std::shared_ptr<const CandidateGenerator>> gens, double score, double threshold = 1.0) {
    const auto res = fixtures::shipped();
    CoreChatConfig cfg;
    cfg.generators = std::move(gens);
    cfg.features.empathy = res->empathy.get();
    cfg.features.bot = res->bot;
    cfg.ranker = {std::make_shared<ConstRanker>(score), threshold};
    cfg.editorial = res->editorial.get();
    return CoreChat(cfg);
}

}  // namespace

TEST(GenerateCandidates, EmptyEnginesGiveNothing) {
    const auto r = generate_candidates(state_of("hi"), {});
    EXPECT_TRUE(r.candidates.empty());
    EXPECT_TRUE(r.failures.empty());
}

TEST(GenerateCandidates, CapsPerSource) {
    std::vector<std::shared_ptr<const CandidateGenerator>> gens = {
        std::make_shared<FixedGenerator>(CandidateSource::Neural, numbered("neural", 50)),
        std::make_shared<FixedGenerator>(CandidateSource::Paired, numbered("paired", 450)),
        std::make_shared<FixedGenerator>(CandidateSource::Unpaired, numbered("unpaired", 450))};
    const auto r = generate_candidates(state_of("hi"), gens);
    EXPECT_EQ(r.per_source.at("paired"), 400u);
    EXPECT_EQ(r.per_source.at("unpaired"), 400u);
    EXPECT_EQ(r.per_source.at("neural"), 20u);
    EXPECT_EQ(r.candidates.size(), 820u);
    EXPECT_EQ(source_cap(CandidateSource::Neural), 20u);
}

TEST(GenerateCandidates, DuplicatesKeepHighestPrioritySource) {
    std::vector<std::shared_ptr<const CandidateGenerator>> gens = {
        std::make_shared<FixedGenerator>(CandidateSource::Neural, std::vector<std::string>{"Same text!", "neural only"}),
        std::make_shared<FixedGenerator>(CandidateSource::Unpaired, std::vector<std::string>{"same text"}),
        std::make_shared<FixedGenerator>(CandidateSource::Paired, std::vector<std::string>{"SAME TEXT"})};
    const auto r = generate_candidates(state_of("hi"), gens);
    ASSERT_EQ(r.candidates.size(), 2u);
    EXPECT_EQ(r.candidates[0].source, CandidateSource::Paired);
    EXPECT_EQ(r.candidates[1].text, "neural only");
}

TEST(GenerateCandidates, FailureIsIsolated) {
    std::vector<std::shared_ptr<const CandidateGenerator>> gens = {
        std::make_shared<FixedGenerator>(CandidateSource::Paired, std::vector<std::string>{"a"}),
        std::make_shared<FixedGenerator>(CandidateSource::Unpaired, std::vector<std::string>{}, true),
        std::make_shared<FixedGenerator>(CandidateSource::Neural, std::vector<std::string>{"b"})};
    const auto r = generate_candidates(state_of("hi"), gens);
    EXPECT_EQ(r.candidates.size(), 2u);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].generator, "unpaired");
}

TEST(Features, IdenticalCandidateHasUnitCohesionAndNeuralSentinel) {
    const auto res = fixtures::shipped();
    FeatureContext ctx;
    ctx.empathy = res->empathy.get();
    ctx.bot = res->bot;
    const auto s = state_of("I love the Great Wall");
    FeatureExtractor fx(ctx, s);
    ResponseCandidate c;
    c.text = "I love the Great Wall";
    c.source = CandidateSource::Neural;
    const auto f = fx.features(c);
    EXPECT_EQ(f.names, feature_names());
    EXPECT_NEAR(f.at("cohesion_cosine"), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(f.at("retrieval_present"), 0.0);
    EXPECT_DOUBLE_EQ(f.at("retrieval_bm25"), 0.0);
}

TEST(Features, MatchingEmpathyGivesFullAgreement) {
    const auto res = fixtures::shipped();
    FeatureContext ctx;
    ctx.empathy = res->empathy.get();
    ctx.bot = res->bot;
    auto s = state_of("how are you?");
    const std::string reply = "I am happy today";
    const auto target = FeatureExtractor(ctx, s).candidate_empathy(reply);
    s.e_r = target;
    FeatureExtractor fx(ctx, s);
    ResponseCandidate c;
    c.text = reply;
    EXPECT_DOUBLE_EQ(fx.features(c).at("empathy_agreement"), 1.0);
    EXPECT_NEAR(fx.features(c).at("empathy_dense_cosine"), 1.0, 1e-12);
}

TEST(Features, BowCosineAndOverlap) {
    EXPECT_DOUBLE_EQ(bow_cosine("", "x"), 0.0);
    EXPECT_NEAR(bow_cosine("a b", "a b"), 1.0, 1e-12);
    EXPECT_NEAR(bow_cosine("a", "b"), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(content_overlap("music songs", "music", nullptr), 0.5);
}

TEST(RankAndSelect, SingleAboveThresholdAlwaysChosen) {
    std::vector<ResponseCandidate> c(1);
    std::mt19937_64 rng(1);
    const auto sel = rank_and_select(c, {std::make_shared<ConstRanker>(1.5), 1.0}, rng);
    EXPECT_TRUE(sel.valid);
    EXPECT_EQ(sel.index, 0u);
    EXPECT_EQ(sel.eligible, 1u);
    EXPECT_DOUBLE_EQ(*c[0].rank_score, 1.5);
}

TEST(RankAndSelect, AllBelowOrAtThresholdIsInvalid) {
    std::vector<ResponseCandidate> c(3);
    std::mt19937_64 rng(1);
    EXPECT_FALSE(rank_and_select(c, {std::make_shared<ConstRanker>(1.0), 1.0}, rng).valid);
    std::vector<ResponseCandidate> none;
    EXPECT_FALSE(rank_and_select(none, {std::make_shared<ConstRanker>(2.0), 1.0}, rng).valid);
}

TEST(RankAndSelect, UniformAmongEligible) {
    std::vector<ResponseCandidate> c(3);
    std::mt19937_64 rng(42);
    std::array<int, 3> counts{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[rank_and_select(c, {std::make_shared<ConstRanker>(1.5), 1.0}, rng).index];
    const double sigma = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
    for (int k : counts) EXPECT_LT(std::abs(k - n / 3.0), 3.0 * sigma);
}

TEST(Editorial, NoCandidateTextAndRotation) {
    const auto& ed = *fixtures::shipped()->editorial;
    std::size_t counter = 0;
    const auto first = ed.next(EditorialReason::NoCandidate, counter);
    EXPECT_EQ(first, "Hmmm, difficult to say. What do you think?");
    EXPECT_NE(ed.next(EditorialReason::NoCandidate, counter), first);
    EXPECT_EQ(counter, 2u);
    for (const auto& t : ed.texts(EditorialReason::ImproperInput)) {
        EXPECT_NE(text::to_lower_ascii(t).find("let us talk about something else"), std::string::npos);
    }
}

TEST(Respond, EmptyEnginesFallBackToEditorial) {
    const auto chat = make_chat({}, 2.0);
    ChatSessionState ss;
    std::mt19937_64 rng(1);
    const auto out = chat.respond(state_of("hello"), ss, rng);
    ASSERT_TRUE(out.trace.editorial);
    EXPECT_EQ(*out.trace.editorial, EditorialReason::NoCandidate);
    EXPECT_TRUE(out.trace.meta.editorial_used);
    EXPECT_EQ(out.trace.selected_source, "editorial");
}

TEST(Respond, SelectedIsAnAboveThresholdCandidate) {
    auto gen = std::make_shared<FixedGenerator>(CandidateSource::Paired, numbered("reply", 5));
    const auto chat = make_chat({gen}, 1.5);
    ChatSessionState ss;
    std::mt19937_64 rng(7);
    const auto out = chat.respond(state_of("hello"), ss, rng);
    ASSERT_TRUE(out.trace.selected);
    const auto& sel = out.trace.candidates[*out.trace.selected];
    EXPECT_EQ(sel.text, out.response);
    EXPECT_GT(*sel.rank_score, out.trace.threshold);
    for (const auto& c : out.trace.candidates) EXPECT_EQ(c.features.values.size(), feature_names().size());
}

TEST(Respond, AllGeneratorsFailingIsModelFailure) {
    auto bad = std::make_shared<FixedGenerator>(CandidateSource::Paired, std::vector<std::string>{}, true);
    const auto chat = make_chat({bad}, 1.5);
    ChatSessionState ss;
    std::mt19937_64 rng(1);
    const auto out = chat.respond(state_of("hello"), ss, rng);
    EXPECT_EQ(out.trace.editorial, EditorialReason::ModelFailure);
    EXPECT_EQ(out.trace.failures.size(), 1u);
}

TEST(Respond, ImproperInputIsDeflected) {
    auto gen = std::make_shared<FixedGenerator>(CandidateSource::Paired, numbered("reply", 2));
    const auto chat = make_chat({gen}, 1.5);
    ChatSessionState ss;
    std::mt19937_64 rng(1);
    const auto out = chat.respond(state_of("you are stupid"), ss, rng);
    EXPECT_EQ(out.trace.editorial, EditorialReason::ImproperInput);
}

TEST(Respond, RecentRepliesAreSuppressed) {
    auto gen = std::make_shared<FixedGenerator>(CandidateSource::Paired, std::vector<std::string>{"only reply"});
    const auto chat = make_chat({gen}, 1.5);
    ChatSessionState ss;
    std::mt19937_64 rng(1);
    EXPECT_EQ(chat.respond(state_of("hello"), ss, rng).response, "only reply");
    const auto second = chat.respond(state_of("hello again"), ss, rng);
    EXPECT_EQ(second.trace.suppressed_repeats, std::vector<std::string>{"only reply"});
    EXPECT_TRUE(second.trace.editorial);
}

TEST(Respond, DeterministicGivenSeed) {
    auto gen = std::make_shared<FixedGenerator>(CandidateSource::Paired, numbered("reply", 30));
    const auto chat = make_chat({gen}, 1.5);
    for (std::uint64_t seed : {1, 2, 3}) {
        ChatSessionState a, b;
        std::mt19937_64 ra(seed), rb(seed);
        EXPECT_EQ(chat.respond(state_of("hello"), a, ra).response, chat.respond(state_of("hello"), b, rb).response);
    }
}

TEST(AssessTurn, RepeatedUserInputFlagged) {
    WorkingMemory m;
    TurnAnnotations a;
    m = tracker_update(std::move(m), "I like jazz", "Jazz is lovely, who is your favourite?", std::move(a), 1);
    const auto meta = assess_turn(state_of("I like jazz", m), "Miles Davis changed everything.", false,
                                  &fixtures::shipped()->empathy->lexicons());
    EXPECT_TRUE(meta.repeats_input);
    EXPECT_TRUE(meta.no_new_info);
}

TEST(AssessTurn, FreshExchangeNotFlagged) {
    const auto meta = assess_turn(state_of("I visited Paris"), "Did you see the Eiffel Tower?", false,
                                  &fixtures::shipped()->empathy->lexicons());
    EXPECT_FALSE(meta.repeats_input);
    EXPECT_FALSE(meta.no_new_info);
    EXPECT_FALSE(meta.editorial_used);
}

TEST(HeuristicRanker, StaysOnLabelScale) {
    HeuristicRanker r;
    FeatureVector f;
    f.names = feature_names();
    for (double x : {0.0, 0.5, 1.0, 5.0}) {
        f.values.assign(f.names.size(), x);
        const double s = r.score(f);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 2.0);
    }
}
