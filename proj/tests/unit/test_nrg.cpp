#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "../support/oracles.hpp"
#include "socialbot/nrg/nrg.hpp"

using namespace socialbot;
using namespace socialbot::nrg;

namespace {

Eigen::VectorXd ones(std::size_t k) { return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k)); }

NrgExample example(std::vector<int> q, std::vector<int> r, std::size_t k) {
    return {std::move(q), ones(k) * 0.5, ones(k) * 0.5, std::move(r)};
}

}  // namespace

TEST(Vocab, BuildReservesSpecialTokens) {
    const auto v = Vocab::build({"b a a", "c a b"});
    EXPECT_EQ(v.token(Vocab::kEos), Vocab::kEosToken);
    EXPECT_EQ(v.unk(), 1);
    EXPECT_EQ(v.pad(), 2);
    EXPECT_EQ(v.token(3), "a");
    EXPECT_EQ(v.token(4), "b");
    EXPECT_EQ(v.encode("a zzz"), (std::vector<int>{3, 1}));
    EXPECT_EQ(v.decode({3, 4, Vocab::kEos, 5}), "a b");
}

TEST(Vocab, MinimalHasNoUnk) {
    const auto v = Vocab::minimal({"x", "y"});
    EXPECT_EQ(v.size(), 3u);
    EXPECT_FALSE(v.unk());
    EXPECT_EQ(v.encode("x zzz y"), (std::vector<int>{1, 2}));
}

TEST(InteractiveRepr, ZeroWeightsGiveHalf) {
    const auto m = NrgModel::zeros(Vocab::minimal({"a"}), 4, 3);
    const auto v = interactive_repr(ones(3), ones(3), m);
    for (Eigen::Index i = 0; i < v.size(); ++i) EXPECT_DOUBLE_EQ(v[i], 0.5);
}

TEST(InteractiveRepr, OneByOneHandValue) {
    auto m = NrgModel::zeros(Vocab::minimal({"a"}), 1, 1);
    m.params().W_Q(0, 0) = 2.0;
    const auto v = interactive_repr(ones(1), Eigen::VectorXd::Zero(1), m);
    EXPECT_NEAR(v[0], 1.0 / (1.0 + std::exp(-2.0)), 1e-12);
    EXPECT_NEAR(v[0], 0.8808, 1e-4);
}

TEST(InteractiveRepr, SymmetricWhenWeightsShared) {
    auto m = NrgModel::random(Vocab::minimal({"a"}), 4, 3, 2);
    m.params().W_R = m.params().W_Q;
    Eigen::VectorXd a(3), b(3);
    a << 0.1, -0.4, 0.7;
    b << 0.3, 0.2, -0.9;
    EXPECT_TRUE(interactive_repr(a, b, m).isApprox(interactive_repr(b, a, m), 1e-14));
}

TEST(InteractiveRepr, RejectsDimensionMismatch) {
    const auto m = NrgModel::zeros(Vocab::minimal({"a"}), 2, 3);
    EXPECT_THROW(interactive_repr(ones(2), ones(3), m), std::invalid_argument);
}

TEST(EncodeQuery, EmptyIsZeroAndDeterministic) {
    const auto m = NrgModel::random(Vocab::minimal({"a", "b"}), 5, 2, 3);
    EXPECT_TRUE(encode_query({}, m).isZero());
    EXPECT_EQ(encode_query({1, 2, 1}, m), encode_query({1, 2, 1}, m));
}

TEST(EncodeQuery, ZeroWeightsStayAtZero) {
    auto m = NrgModel::zeros(Vocab::minimal({"a"}), 3, 2);
    m.params().E.setConstant(0.7);
    // u = 0.5, candidate = tanh(0) = 0, so h stays 0
    EXPECT_TRUE(encode_query({1}, m).isZero());
}

TEST(GruStep, MatchesComponentwiseReference) {
    const auto m = NrgModel::random(Vocab::minimal({"a", "b", "c"}), 6, 2, 4, 0.5);
    Eigen::VectorXd h = Eigen::VectorXd::LinSpaced(6, -0.5, 0.5);
    const Eigen::VectorXd e = m.params().E.row(2).transpose();
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(6, 0.3);
    EXPECT_TRUE(gru_step(h, e, v, m).isApprox(oracle::gru_reference(m, h, e, v), 1e-12));
}

TEST(NextToken, DistributionSumsToOne) {
    const auto m = NrgModel::random(Vocab::build({"a b c d e"}), 4, 2, 5, 1.0);
    const auto p = next_token_dist(Eigen::VectorXd::Constant(4, 0.2), Eigen::VectorXd::Constant(4, 0.5), m);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GT(p.minCoeff(), 0.0);
}

TEST(Perplexity, UniformModelGivesVocabSize) {
    // zero embeddings make every logit zero
    const auto m = NrgModel::zeros(Vocab::minimal({"w"}), 3, 2);
    const std::vector<NrgExample> held = {example({1}, {1, 1, Vocab::kEos}, 2)};
    EXPECT_NEAR(sequence_log_prob(held[0], m), 3.0 * std::log(0.5), 1e-12);
    EXPECT_NEAR(perplexity(m, held), 2.0, 1e-12);
}

TEST(Training, ZeroLearningRateLeavesParametersUnchanged) {
    auto m = NrgModel::random(Vocab::minimal({"a", "b"}), 4, 2, 6);
    const auto before = m.to_json();
    NrgTrainParams p;
    p.learning_rate = 0.0;
    p.epochs = 3;
    train(m, {example({1}, {2, Vocab::kEos}, 2)}, p);
    EXPECT_EQ(m.to_json(), before);
}

TEST(Training, MemorisesOneExample) {
    auto m = NrgModel::random(Vocab::minimal({"a", "b", "c"}), 8, 2, 7);
    const auto ex = example({1, 2}, {3, 1, Vocab::kEos}, 2);
    NrgTrainParams p;
    p.learning_rate = 0.5;
    p.epochs = 200;
    NrgTrainReport rep;
    train(m, {ex}, p, &rep);
    EXPECT_LT(-sequence_log_prob(ex, m), 0.1);
    EXPECT_LT(rep.epoch_nll.back(), rep.epoch_nll.front());
    EXPECT_EQ(rep.epoch_nll.size(), 201u);
}

TEST(Training, RejectsEmptyCorpus) {
    auto m = NrgModel::random(Vocab::minimal({"a"}), 2, 1, 1);
    EXPECT_THROW(train(m, {}, {}), std::invalid_argument);
}

TEST(Training, DeterministicGivenSeed) {
    std::vector<NrgExample> corpus = {example({1}, {2, Vocab::kEos}, 2), example({2}, {1, 1, Vocab::kEos}, 2)};
    auto a = NrgModel::random(Vocab::minimal({"a", "b"}), 4, 2, 8);
    auto b = a;
    NrgTrainParams p;
    p.epochs = 5;
    train(a, corpus, p);
    train(b, corpus, p);
    EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(Training, ConstantReprLeavesEmpathyWeightsAlone) {
    auto m = NrgModel::random(Vocab::minimal({"a", "b"}), 4, 2, 9);
    m.set_empathy_conditioned(false);
    const Eigen::MatrixXd wq = m.params().W_Q;
    NrgTrainParams p;
    p.epochs = 3;
    train(m, {example({1}, {2, Vocab::kEos}, 2)}, p);
    EXPECT_EQ(m.params().W_Q, wq);
}

TEST(SequenceProbability, ShortSequencesSumToAtMostOne) {
    const auto m = NrgModel::random(Vocab::minimal({"a", "b"}), 3, 2, 10, 1.0);
    double total = 0.0;
    for (const auto& seq : oracle::all_hypotheses(3, 2)) {
        if (seq.back() != Vocab::kEos) continue;
        total += std::exp(sequence_log_prob(example({1}, seq, 2), m));
    }
    EXPECT_LE(total, 1.0 + 1e-12);
    EXPECT_GT(total, 0.0);
}

TEST(BeamSearch, ResultCountAndOrdering) {
    const auto m = NrgModel::random(Vocab::build({"a b c d e f g"}), 4, 2, 11, 1.0);
    for (std::size_t width : {1, 3, 25}) {
        const auto hyps = beam_search({3}, ones(2), ones(2), m, {width, 6, 20});
        EXPECT_LE(hyps.size(), std::min<std::size_t>(width, 20));
        EXPECT_FALSE(hyps.empty());
        for (std::size_t i = 0; i < hyps.size(); ++i) {
            EXPECT_LE(hyps[i].log_prob, 0.0);
            EXPECT_EQ(hyps[i].finished, !hyps[i].tokens.empty() && hyps[i].tokens.back() == Vocab::kEos);
            for (int t : hyps[i].tokens) EXPECT_TRUE(t != 1 && t != 2) << "UNK or PAD emitted";
            if (i > 0) EXPECT_GE(hyps[i - 1].normalized(), hyps[i].normalized());
        }
    }
}

TEST(BeamSearch, LogProbMatchesTeacherForcing) {
    const auto m = NrgModel::random(Vocab::minimal({"a", "b", "c"}), 4, 2, 12, 1.0);
    for (const auto& h : beam_search({1}, ones(2), ones(2), m, {4, 5, 4})) {
        EXPECT_NEAR(h.log_prob, oracle::prefix_log_prob(m, {1}, ones(2), ones(2), h.tokens), 1e-9);
    }
}

TEST(BeamGenerate, NeuralCandidates) {
    const auto m = NrgModel::random(Vocab::minimal({"hello", "there"}), 4, 3, 13, 1.0);
    EmpathyVector e;
    e.dense = {0.0, 0.5, 0.5};
    const auto c = beam_generate("hello", e, e, m, {5, 4, 5});
    EXPECT_LE(c.size(), 5u);
    for (const auto& x : c) {
        EXPECT_EQ(x.source, CandidateSource::Neural);
        EXPECT_FALSE(x.retrieval.present);
    }
}

TEST(NrgModel, SaveLoadRoundTrip) {
    const auto m = NrgModel::random(Vocab::build({"x y z"}), 3, 2, 14);
    const auto path = std::filesystem::temp_directory_path() / "socialbot_unit_nrg.json";
    m.save(path);
    const auto back = NrgModel::load(path);
    EXPECT_EQ(back.to_json(), m.to_json());
    EXPECT_EQ(back.vocab().tokens(), m.vocab().tokens());
    std::filesystem::remove(path);
}

TEST(NrgModel, GradientMatchesFiniteDifferencesOnEveryTensor) {
    const auto m0 = NrgModel::random(Vocab::minimal({"a", "b"}), 3, 2, 15, 0.5);
    Eigen::VectorXd eq(2), er(2);
    eq << 0.6, -0.2;
    er << -0.3, 0.8;
    const NrgExample ex{{1, 2}, eq, er, {2, 1, Vocab::kEos}};
    NrgParams grad = m0.params().zeros_like();
    nll_and_gradient(ex, m0, grad);
    auto m = m0;
    double worst = 0.0;
    std::map<std::string, const MatrixXd*> analytic;
    grad.for_each([&](const std::string& name, const MatrixXd& g) { analytic[name] = &g; });
    m.params().for_each([&](const std::string& name, MatrixXd& W) {
        MatrixXd num(W.rows(), W.cols());
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) {
                const double keep = W(r, c);
                W(r, c) = keep + 1e-6;
                const double up = -sequence_log_prob(ex, m);
                W(r, c) = keep - 1e-6;
                const double dn = -sequence_log_prob(ex, m);
                W(r, c) = keep;
                num(r, c) = (up - dn) / 2e-6;
            }
        }
        // per-tensor error; single tiny entries are dominated by rounding
        const MatrixXd& G = *analytic.at(name);
        worst = std::max(worst, (num - G).norm() / std::max({1e-10, num.norm(), G.norm()}));
    });
    EXPECT_LT(worst, 1e-4);
}
