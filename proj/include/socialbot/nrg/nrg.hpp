#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socialbot/core/candidate.hpp"
#include "socialbot/util/jsonl.hpp"

namespace socialbot::nrg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Token table. EOS is always id 0; UNK and PAD, when present, are 1 and 2.
class Vocab {
public:
    static constexpr int kEos = 0;
    static constexpr const char* kEosToken = "<eos>";
    static constexpr const char* kUnkToken = "<unk>";
    static constexpr const char* kPadToken = "<pad>";

    /// EOS, UNK, PAD, then corpus tokens by descending count, ties by text.
    static Vocab build(const std::vector<std::string>& texts, std::size_t min_count = 1);
    /// EOS followed by `tokens` in order, no UNK or PAD.
    static Vocab minimal(const std::vector<std::string>& tokens);

    std::size_t size() const { return tokens_.size(); }
    const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::optional<int> find(const std::string& token) const;
    std::optional<int> unk() const { return find(kUnkToken); }
    std::optional<int> pad() const { return find(kPadToken); }

    /// Token ids of `text`; unknown words map to UNK or are skipped without it.
    std::vector<int> encode(const std::string& text) const;
    /// Tokens joined by spaces, stopping at EOS.
    std::string decode(const std::vector<int>& ids) const;

    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    void add(const std::string& token);
    std::vector<std::string> tokens_;
    std::map<std::string, int> ids_;
};

/// Trainable tensors. Decoder gates read [h; e; v] (3d rows); encoder gates
/// read [h; e] (2d rows). The output layer scores token w as
/// E[w] . (W_o^T [h_prev; v]).
struct NrgParams {
    MatrixXd E;    // |V| x d word embeddings, shared by input and output
    MatrixXd W_Q;  // k x d
    MatrixXd W_R;  // k x d
    MatrixXd W_u;  // 3d x d
    MatrixXd W_z;
    MatrixXd W_l;
    MatrixXd W_o;  // 2d x d
    MatrixXd U_u;  // 2d x d
    MatrixXd U_z;
    MatrixXd U_l;

    void for_each(const std::function<void(const std::string&, MatrixXd&)>& fn);
    void for_each(const std::function<void(const std::string&, const MatrixXd&)>& fn) const;
    /// Same shapes, all zero.
    NrgParams zeros_like() const;
    double squared_norm() const;
};

class NrgModel {
public:
    NrgModel() = default;

    /// Entries uniform in [-scale, scale].
    static NrgModel random(Vocab vocab, std::size_t d, std::size_t k, std::uint64_t seed, double scale = 0.1);
    static NrgModel zeros(Vocab vocab, std::size_t d, std::size_t k);

    const Vocab& vocab() const { return vocab_; }
    std::size_t d() const { return d_; }
    std::size_t k() const { return k_; }
    NrgParams& params() { return params_; }
    const NrgParams& params() const { return params_; }

    /// When false the interactive representation is the constant 0.5 vector
    /// and W_Q, W_R receive no updates (the unconditioned baseline).
    bool empathy_conditioned() const { return conditioned_; }
    void set_empathy_conditioned(bool on) { conditioned_ = on; }

    json to_json() const;
    static NrgModel from_json(const json& j);
    void save(const std::filesystem::path& path) const;
    static NrgModel load(const std::filesystem::path& path);

private:
    Vocab vocab_;
    std::size_t d_ = 0;
    std::size_t k_ = 0;
    bool conditioned_ = true;
    NrgParams params_;
};

/// v = sigmoid(W_Q^T e_q + W_R^T e_r). Throws on dimension mismatch.
VectorXd interactive_repr(const VectorXd& e_q, const VectorXd& e_r, const NrgModel& model);

/// Final source-side hidden state; zero for an empty query.
VectorXd encode_query(const std::vector<int>& tokens, const NrgModel& model);

/// One decoder update:
///   u = sig(W_u^T[h;e;v]), z = sig(W_z^T[h;e;v]), l = tanh(W_l^T[z*h;e;v]),
///   h' = (1-u)*h + u*l
VectorXd gru_step(const VectorXd& h_prev, const VectorXd& e, const VectorXd& v, const NrgModel& model);

/// Softmax over the vocabulary from the previous hidden state.
VectorXd next_token_dist(const VectorXd& h_prev, const VectorXd& v, const NrgModel& model);
VectorXd next_token_logits(const VectorXd& h_prev, const VectorXd& v, const NrgModel& model);

struct NrgExample {
    std::vector<int> query;
    VectorXd e_q;
    VectorXd e_r;
    std::vector<int> response;  // ends with EOS
};

/// Tokenizes and appends EOS to the response.
NrgExample make_example(const Vocab& vocab, const std::string& qc, const std::vector<double>& e_q,
                        const std::vector<double>& e_r, const std::string& response);

/// Teacher-forced sum of log p(r_t | r_<t, qc, e_q, e_r).
double sequence_log_prob(const NrgExample& ex, const NrgModel& model);

/// Negative log-likelihood of one example and its gradient (accumulated into
/// `grad`, which must have the model's shapes).
double nll_and_gradient(const NrgExample& ex, const NrgModel& model, NrgParams& grad);

struct NrgTrainParams {
    double learning_rate = 0.1;
    double lr_decay = 0.0;  // epoch e uses learning_rate / (1 + lr_decay * (e - 1))
    int epochs = 10;
    std::uint64_t seed = 1;
    double clip_norm = 5.0;  // <= 0 disables clipping
};

struct NrgTrainReport {
    /// Mean per-token NLL over the training corpus; entry 0 is before training.
    std::vector<double> epoch_nll;
};

/// Plain SGD, one example per update, shuffled each epoch from `seed`.
/// Throws std::invalid_argument on an empty corpus and std::runtime_error
/// when the loss stops being finite.
void train(NrgModel& model, const std::vector<NrgExample>& corpus, const NrgTrainParams& params,
           NrgTrainReport* report = nullptr);

/// exp(total NLL / total tokens), EOS counted.
double perplexity(const NrgModel& model, const std::vector<NrgExample>& heldout);

struct BeamHypothesis {
    std::vector<int> tokens;
    double log_prob = 0.0;
    bool finished = false;

    double normalized() const { return tokens.empty() ? log_prob : log_prob / static_cast<double>(tokens.size()); }
};

struct BeamParams {
    std::size_t beam_width = 20;
    std::size_t max_len = 20;
    std::size_t max_results = 20;
};

/// Expands every live hypothesis by every token (UNK and PAD excluded),
/// keeps the best `beam_width` by accumulated log-prob, retires those ending
/// in EOS. Live hypotheses left at max_len are returned unfinished. Results
/// are sorted by length-normalised log-prob and capped at
/// min(beam_width, max_results).
std::vector<BeamHypothesis> beam_search(const std::vector<int>& query, const VectorXd& e_q, const VectorXd& e_r,
                                        const NrgModel& model, const BeamParams& params);

/// Finished hypotheses (unfinished ones only when none finished) as
/// neural candidates; generator_score is the normalised log-prob.
std::vector<ResponseCandidate> beam_generate(const std::string& qc, const EmpathyVector& e_q, const EmpathyVector& e_r,
                                             const NrgModel& model, const BeamParams& params);

}  // namespace socialbot::nrg
