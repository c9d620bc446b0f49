#include "socialbot/nrg/nrg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "socialbot/util/tensor_io.hpp"
#include "socialbot/util/text.hpp"

namespace socialbot::nrg {

// Vocab ----------------------------------------------------------------------

void Vocab::add(const std::string& token) {
    if (ids_.count(token) > 0) return;
    ids_[token] = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<std::string>& texts, std::size_t min_count) {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : texts) {
        for (const auto& w : text::words(t)) ++counts[w];
    }
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocab v;
    v.add(kEosToken);
    v.add(kUnkToken);
    v.add(kPadToken);
    for (const auto& [w, c] : sorted) {
        if (c >= min_count) v.add(w);
    }
    return v;
}

Vocab Vocab::minimal(const std::vector<std::string>& tokens) {
    Vocab v;
    v.add(kEosToken);
    for (const auto& t : tokens) v.add(t);
    return v;
}

std::optional<int> Vocab::find(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::vector<int> Vocab::encode(const std::string& s) const {
    std::vector<int> out;
    const auto unk_id = unk();
    for (const auto& w : text::words(s)) {
        if (auto id = find(w)) {
            out.push_back(*id);
        } else if (unk_id) {
            out.push_back(*unk_id);
        }
    }
    return out;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        if (id == kEos) break;
        if (!out.empty()) out += ' ';
        out += token(id);
    }
    return out;
}

// Parameters -----------------------------------------------------------------

void NrgParams::for_each(const std::function<void(const std::string&, MatrixXd&)>& fn) {
    fn("E", E);
    fn("W_Q", W_Q);
    fn("W_R", W_R);
    fn("W_u", W_u);
    fn("W_z", W_z);
    fn("W_l", W_l);
    fn("W_o", W_o);
    fn("U_u", U_u);
    fn("U_z", U_z);
    fn("U_l", U_l);
}

void NrgParams::for_each(const std::function<void(const std::string&, const MatrixXd&)>& fn) const {
    const_cast<NrgParams*>(this)->for_each([&](const std::string& n, MatrixXd& m) { fn(n, m); });
}

NrgParams NrgParams::zeros_like() const {
    NrgParams z = *this;
    z.for_each([](const std::string&, MatrixXd& m) { m.setZero(); });
    return z;
}

double NrgParams::squared_norm() const {
    double s = 0.0;
    for_each([&](const std::string&, const MatrixXd& m) { s += m.squaredNorm(); });
    return s;
}

namespace {

NrgParams shaped(std::size_t vocab, std::size_t d, std::size_t k) {
    const auto D = static_cast<Eigen::Index>(d);
    const auto K = static_cast<Eigen::Index>(k);
    NrgParams p;
    p.E = MatrixXd::Zero(static_cast<Eigen::Index>(vocab), D);
    p.W_Q = MatrixXd::Zero(K, D);
    p.W_R = MatrixXd::Zero(K, D);
    p.W_u = MatrixXd::Zero(3 * D, D);
    p.W_z = MatrixXd::Zero(3 * D, D);
    p.W_l = MatrixXd::Zero(3 * D, D);
    p.W_o = MatrixXd::Zero(2 * D, D);
    p.U_u = MatrixXd::Zero(2 * D, D);
    p.U_z = MatrixXd::Zero(2 * D, D);
    p.U_l = MatrixXd::Zero(2 * D, D);
    return p;
}

VectorXd sigmoid(const VectorXd& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

VectorXd softmax(const VectorXd& logits) {
    const double m = logits.maxCoeff();
    VectorXd p = (logits.array() - m).exp().matrix();
    return p / p.sum();
}

/// Log-softmax entry without forming the distribution twice.
double log_softmax_at(const VectorXd& logits, int idx) {
    const double m = logits.maxCoeff();
    return logits[idx] - m - std::log((logits.array() - m).exp().sum());
}

}  // namespace

NrgModel NrgModel::zeros(Vocab vocab, std::size_t d, std::size_t k) {
    if (d == 0 || k == 0) throw std::invalid_argument("NrgModel: d and k must be positive");
    NrgModel m;
    m.d_ = d;
    m.k_ = k;
    m.params_ = shaped(vocab.size(), d, k);
    m.vocab_ = std::move(vocab);
    return m;
}

NrgModel NrgModel::random(Vocab vocab, std::size_t d, std::size_t k, std::uint64_t seed, double scale) {
    NrgModel m = zeros(std::move(vocab), d, k);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    m.params_.for_each([&](const std::string&, MatrixXd& t) {
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
            for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = dist(rng);
        }
    });
    return m;
}

json NrgModel::to_json() const {
    json tensors = json::object();
    params_.for_each([&](const std::string& n, const MatrixXd& m) { tensors[n] = matrix_to_json(m); });
    return json{{"schema_version", 1}, {"kind", "nrg"},       {"d", d_}, {"k", k_},
                {"empathy_conditioned", conditioned_}, {"vocab", vocab_.tokens()}, {"tensors", tensors}};
}

NrgModel NrgModel::from_json(const json& j) {
    if (j.value("schema_version", 0) != 1 || j.value("kind", "") != "nrg") throw DataError("not a version-1 nrg model");
    const auto tokens = j.at("vocab").get<std::vector<std::string>>();
    if (tokens.empty() || tokens[0] != Vocab::kEosToken) throw DataError("nrg vocab must start with EOS");
    Vocab v = Vocab::minimal({tokens.begin() + 1, tokens.end()});
    NrgModel m = zeros(std::move(v), j.at("d").get<std::size_t>(), j.at("k").get<std::size_t>());
    m.conditioned_ = j.value("empathy_conditioned", true);
    m.params_.for_each([&](const std::string& n, MatrixXd& t) {
        MatrixXd loaded = matrix_from_json(j.at("tensors").at(n));
        if (loaded.rows() != t.rows() || loaded.cols() != t.cols()) throw DataError("nrg tensor " + n + " has the wrong shape");
        t = std::move(loaded);
    });
    return m;
}

void NrgModel::save(const std::filesystem::path& path) const { write_text_file(path, to_json().dump() + "\n"); }

NrgModel NrgModel::load(const std::filesystem::path& path) { return from_json(load_json(path)); }

// Forward --------------------------------------------------------------------

VectorXd interactive_repr(const VectorXd& e_q, const VectorXd& e_r, const NrgModel& model) {
    const auto K = static_cast<Eigen::Index>(model.k());
    if (e_q.size() != K || e_r.size() != K) {
        throw std::invalid_argument("interactive_repr: empathy vectors must have length " + std::to_string(model.k()));
    }
    if (!model.empathy_conditioned()) return VectorXd::Constant(static_cast<Eigen::Index>(model.d()), 0.5);
    const auto& p = model.params();
    return sigmoid(p.W_Q.transpose() * e_q + p.W_R.transpose() * e_r);
}

namespace {

struct StepCache {
    VectorXd h_prev, x, u, z, x2, l, h;
    int token = 0;
};

/// Shared GRU algebra. `v` is empty for the encoder; the gate matrices then
/// have 2d rows instead of 3d.
void gru_forward(const VectorXd& h_prev, const VectorXd& e, const VectorXd* v, const MatrixXd& Wu,
                 const MatrixXd& Wz, const MatrixXd& Wl, StepCache& c) {
    const Eigen::Index d = h_prev.size();
    const Eigen::Index n = v != nullptr ? 3 * d : 2 * d;
    c.h_prev = h_prev;
    c.x.resize(n);
    if (v != nullptr) {
        c.x << h_prev, e, *v;
    } else {
        c.x << h_prev, e;
    }
    c.u = sigmoid(Wu.transpose() * c.x);
    c.z = sigmoid(Wz.transpose() * c.x);
    c.x2 = c.x;
    c.x2.head(d) = c.z.cwiseProduct(h_prev);
    c.l = (Wl.transpose() * c.x2).array().tanh().matrix();
    c.h = ((1.0 - c.u.array()) * h_prev.array() + c.u.array() * c.l.array()).matrix();
}

/// Backward through one GRU step. Accumulates weight gradients, returns the
/// gradient w.r.t. h_prev and writes input gradients into de / dv.
VectorXd gru_backward(const StepCache& c, const VectorXd& dh, const MatrixXd& Wu, const MatrixXd& Wz,
                      const MatrixXd& Wl, MatrixXd& gWu, MatrixXd& gWz, MatrixXd& gWl, VectorXd& de, VectorXd* dv) {
    const Eigen::Index d = c.h_prev.size();
    VectorXd dh_prev = dh.cwiseProduct((1.0 - c.u.array()).matrix());
    const VectorXd dl = dh.cwiseProduct(c.u);
    const VectorXd du = dh.cwiseProduct(c.l - c.h_prev);

    const VectorXd da_l = dl.array() * (1.0 - c.l.array().square());
    gWl.noalias() += c.x2 * da_l.transpose();
    const VectorXd dx2 = Wl * da_l;
    const VectorXd dzh = dx2.head(d);
    dh_prev += dzh.cwiseProduct(c.z);
    const VectorXd dz = dzh.cwiseProduct(c.h_prev);

    const VectorXd da_u = du.array() * c.u.array() * (1.0 - c.u.array());
    const VectorXd da_z = dz.array() * c.z.array() * (1.0 - c.z.array());
    gWu.noalias() += c.x * da_u.transpose();
    gWz.noalias() += c.x * da_z.transpose();
    const VectorXd dx = Wu * da_u + Wz * da_z;

    dh_prev += dx.head(d);
    de = dx2.segment(d, d) + dx.segment(d, d);
    if (dv != nullptr) *dv += dx2.tail(d) + dx.tail(d);
    return dh_prev;
}

VectorXd embedding(const NrgModel& m, int token) { return m.params().E.row(token).transpose(); }

}  // namespace

VectorXd encode_query(const std::vector<int>& tokens, const NrgModel& model) {
    const auto& p = model.params();
    VectorXd h = VectorXd::Zero(static_cast<Eigen::Index>(model.d()));
    StepCache c;
    for (int t : tokens) {
        gru_forward(h, embedding(model, t), nullptr, p.U_u, p.U_z, p.U_l, c);
        h = c.h;
    }
    return h;
}

VectorXd gru_step(const VectorXd& h_prev, const VectorXd& e, const VectorXd& v, const NrgModel& model) {
    const auto D = static_cast<Eigen::Index>(model.d());
    if (h_prev.size() != D || e.size() != D || v.size() != D) throw std::invalid_argument("gru_step: dimension mismatch");
    const auto& p = model.params();
    StepCache c;
    gru_forward(h_prev, e, &v, p.W_u, p.W_z, p.W_l, c);
    return c.h;
}

VectorXd next_token_logits(const VectorXd& h_prev, const VectorXd& v, const NrgModel& model) {
    const auto& p = model.params();
    VectorXd y(2 * h_prev.size());
    y << h_prev, v;
    return p.E * (p.W_o.transpose() * y);
}

VectorXd next_token_dist(const VectorXd& h_prev, const VectorXd& v, const NrgModel& model) {
    return softmax(next_token_logits(h_prev, v, model));
}

NrgExample make_example(const Vocab& vocab, const std::string& qc, const std::vector<double>& e_q,
                        const std::vector<double>& e_r, const std::string& response) {
    NrgExample ex;
    ex.query = vocab.encode(qc);
    ex.e_q = Eigen::Map<const VectorXd>(e_q.data(), static_cast<Eigen::Index>(e_q.size()));
    ex.e_r = Eigen::Map<const VectorXd>(e_r.data(), static_cast<Eigen::Index>(e_r.size()));
    ex.response = vocab.encode(response);
    ex.response.push_back(Vocab::kEos);
    return ex;
}

double sequence_log_prob(const NrgExample& ex, const NrgModel& model) {
    if (ex.response.empty() || ex.response.back() != Vocab::kEos) {
        throw std::invalid_argument("sequence_log_prob: response must end with EOS");
    }
    const VectorXd v = interactive_repr(ex.e_q, ex.e_r, model);
    VectorXd h = encode_query(ex.query, model);
    double total = 0.0;
    for (std::size_t t = 0; t < ex.response.size(); ++t) {
        total += log_softmax_at(next_token_logits(h, v, model), ex.response[t]);
        if (t + 1 < ex.response.size()) h = gru_step(h, embedding(model, ex.response[t]), v, model);
    }
    return total;
}

// Backward -------------------------------------------------------------------

double nll_and_gradient(const NrgExample& ex, const NrgModel& model, NrgParams& g) {
    if (ex.response.empty() || ex.response.back() != Vocab::kEos) {
        throw std::invalid_argument("nll_and_gradient: response must end with EOS");
    }
    const auto& p = model.params();
    const Eigen::Index d = static_cast<Eigen::Index>(model.d());
    const VectorXd v = interactive_repr(ex.e_q, ex.e_r, model);

    std::vector<StepCache> enc(ex.query.size());
    VectorXd h = VectorXd::Zero(d);
    for (std::size_t i = 0; i < ex.query.size(); ++i) {
        enc[i].token = ex.query[i];
        gru_forward(h, embedding(model, ex.query[i]), nullptr, p.U_u, p.U_z, p.U_l, enc[i]);
        h = enc[i].h;
    }

    // hs[t] is the state that predicts response[t]; dec[t] produces hs[t+1]
    const std::size_t m = ex.response.size();
    std::vector<VectorXd> hs(m);
    std::vector<StepCache> dec(m > 0 ? m - 1 : 0);
    std::vector<VectorXd> probs(m);
    hs[0] = h;
    double nll = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        const VectorXd logits = next_token_logits(hs[t], v, model);
        nll -= log_softmax_at(logits, ex.response[t]);
        probs[t] = softmax(logits);
        if (t + 1 < m) {
            dec[t].token = ex.response[t];
            gru_forward(hs[t], embedding(model, ex.response[t]), &v, p.W_u, p.W_z, p.W_l, dec[t]);
            hs[t + 1] = dec[t].h;
        }
    }

    VectorXd dv = VectorXd::Zero(d);
    VectorXd dh = VectorXd::Zero(d);
    VectorXd de(d);
    for (std::size_t t = m; t-- > 0;) {
        // output layer at step t
        VectorXd y(2 * d);
        y << hs[t], v;
        const VectorXd o = p.W_o.transpose() * y;
        VectorXd dlogits = probs[t];
        dlogits[ex.response[t]] -= 1.0;
        g.E.noalias() += dlogits * o.transpose();
        const VectorXd dout = p.E.transpose() * dlogits;
        g.W_o.noalias() += y * dout.transpose();
        const VectorXd dy = p.W_o * dout;
        dh += dy.head(d);
        dv += dy.tail(d);
        // recurrence that produced hs[t]
        if (t > 0) {
            dh = gru_backward(dec[t - 1], dh, p.W_u, p.W_z, p.W_l, g.W_u, g.W_z, g.W_l, de, &dv);
            g.E.row(dec[t - 1].token) += de.transpose();
        }
    }
    for (std::size_t i = enc.size(); i-- > 0;) {
        dh = gru_backward(enc[i], dh, p.U_u, p.U_z, p.U_l, g.U_u, g.U_z, g.U_l, de, nullptr);
        g.E.row(enc[i].token) += de.transpose();
    }
    if (model.empathy_conditioned()) {
        const VectorXd da_v = dv.array() * v.array() * (1.0 - v.array());
        g.W_Q.noalias() += ex.e_q * da_v.transpose();
        g.W_R.noalias() += ex.e_r * da_v.transpose();
    }
    return nll;
}

// Training -------------------------------------------------------------------

namespace {

double corpus_nll(const NrgModel& model, const std::vector<NrgExample>& corpus, std::size_t& tokens) {
    double total = 0.0;
    tokens = 0;
    for (const auto& ex : corpus) {
        total -= sequence_log_prob(ex, model);
        tokens += ex.response.size();
    }
    return total;
}

}  // namespace

void train(NrgModel& model, const std::vector<NrgExample>& corpus, const NrgTrainParams& params,
           NrgTrainReport* report) {
    if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
    for (const auto& ex : corpus) {
        for (int t : ex.query) {
            if (t < 0 || static_cast<std::size_t>(t) >= model.vocab().size()) throw std::invalid_argument("train: token outside vocab");
        }
        for (int t : ex.response) {
            if (t < 0 || static_cast<std::size_t>(t) >= model.vocab().size()) throw std::invalid_argument("train: token outside vocab");
        }
    }
    std::mt19937_64 rng(params.seed);
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    auto record = [&](int epoch) {
        std::size_t tokens = 0;
        const double nll = corpus_nll(model, corpus, tokens);
        const double mean = nll / static_cast<double>(tokens);
        if (!std::isfinite(mean)) {
            throw std::runtime_error("train: non-finite loss after epoch " + std::to_string(epoch) +
                                     " (learning rate " + std::to_string(params.learning_rate) + ")");
        }
        if (report != nullptr) report->epoch_nll.push_back(mean);
    };
    if (report != nullptr) report->epoch_nll.clear();
    record(0);

    NrgParams grad = model.params().zeros_like();
    for (int epoch = 1; epoch <= params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const double epoch_lr = params.learning_rate / (1.0 + params.lr_decay * static_cast<double>(epoch - 1));
        for (std::size_t idx : order) {
            grad.for_each([](const std::string&, MatrixXd& m) { m.setZero(); });
            const double nll = nll_and_gradient(corpus[idx], model, grad);
            if (!std::isfinite(nll)) {
                throw std::runtime_error("train: non-finite loss in epoch " + std::to_string(epoch) + " on example " +
                                         std::to_string(idx));
            }
            double scale = epoch_lr;
            if (params.clip_norm > 0.0) {
                const double norm = std::sqrt(grad.squared_norm());
                if (norm > params.clip_norm) scale *= params.clip_norm / norm;
            }
            if (scale == 0.0) continue;
            NrgParams& p = model.params();
            p.E -= scale * grad.E;
            if (model.empathy_conditioned()) {
                p.W_Q -= scale * grad.W_Q;
                p.W_R -= scale * grad.W_R;
            }
            p.W_u -= scale * grad.W_u;
            p.W_z -= scale * grad.W_z;
            p.W_l -= scale * grad.W_l;
            p.W_o -= scale * grad.W_o;
            p.U_u -= scale * grad.U_u;
            p.U_z -= scale * grad.U_z;
            p.U_l -= scale * grad.U_l;
        }
        record(epoch);
    }
}

double perplexity(const NrgModel& model, const std::vector<NrgExample>& heldout) {
    if (heldout.empty()) throw std::invalid_argument("perplexity: empty heldout set");
    std::size_t tokens = 0;
    const double nll = corpus_nll(model, heldout, tokens);
    return std::exp(nll / static_cast<double>(tokens));
}

// Decoding -------------------------------------------------------------------

namespace {

struct Live {
    BeamHypothesis hyp;
    VectorXd h;
};

bool better_hypothesis(const BeamHypothesis& a, const BeamHypothesis& b, bool normalized) {
    const double sa = normalized ? a.normalized() : a.log_prob;
    const double sb = normalized ? b.normalized() : b.log_prob;
    if (sa != sb) return sa > sb;
    return a.tokens < b.tokens;
}

}  // namespace

std::vector<BeamHypothesis> beam_search(const std::vector<int>& query, const VectorXd& e_q, const VectorXd& e_r,
                                        const NrgModel& model, const BeamParams& params) {
    if (params.beam_width == 0) throw std::invalid_argument("beam_search: beam_width must be >= 1");
    const VectorXd v = interactive_repr(e_q, e_r, model);
    std::vector<bool> banned(model.vocab().size(), false);
    if (auto u = model.vocab().unk()) banned[static_cast<std::size_t>(*u)] = true;
    if (auto p = model.vocab().pad()) banned[static_cast<std::size_t>(*p)] = true;

    std::vector<Live> alive{{BeamHypothesis{}, encode_query(query, model)}};
    std::vector<BeamHypothesis> done;
    for (std::size_t step = 0; step < params.max_len && !alive.empty(); ++step) {
        struct Expansion {
            BeamHypothesis hyp;
            std::size_t parent;
        };
        std::vector<Expansion> expansions;
        for (std::size_t a = 0; a < alive.size(); ++a) {
            const VectorXd logits = next_token_logits(alive[a].h, v, model);
            const double mx = logits.maxCoeff();
            const double lse = mx + std::log((logits.array() - mx).exp().sum());
            for (Eigen::Index w = 0; w < logits.size(); ++w) {
                if (banned[static_cast<std::size_t>(w)]) continue;
                Expansion e{alive[a].hyp, a};
                e.hyp.tokens.push_back(static_cast<int>(w));
                e.hyp.log_prob += logits[w] - lse;
                e.hyp.finished = (w == Vocab::kEos);
                expansions.push_back(std::move(e));
            }
        }
        const std::size_t keep = std::min(params.beam_width, expansions.size());
        std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(),
                          [](const Expansion& x, const Expansion& y) { return better_hypothesis(x.hyp, y.hyp, false); });
        expansions.resize(keep);
        std::vector<Live> next;
        for (auto& e : expansions) {
            if (e.hyp.finished) {
                done.push_back(std::move(e.hyp));
            } else {
                const int tok = e.hyp.tokens.back();
                VectorXd h = gru_step(alive[e.parent].h, embedding(model, tok), v, model);
                next.push_back({std::move(e.hyp), std::move(h)});
            }
        }
        alive = std::move(next);
    }
    for (auto& l : alive) done.push_back(std::move(l.hyp));
    std::sort(done.begin(), done.end(),
              [](const BeamHypothesis& a, const BeamHypothesis& b) { return better_hypothesis(a, b, true); });
    const std::size_t cap = std::min(params.beam_width, params.max_results);
    if (done.size() > cap) done.resize(cap);
    return done;
}

std::vector<ResponseCandidate> beam_generate(const std::string& qc, const EmpathyVector& e_q, const EmpathyVector& e_r,
                                             const NrgModel& model, const BeamParams& params) {
    const VectorXd vq = Eigen::Map<const VectorXd>(e_q.dense.data(), static_cast<Eigen::Index>(e_q.dense.size()));
    const VectorXd vr = Eigen::Map<const VectorXd>(e_r.dense.data(), static_cast<Eigen::Index>(e_r.dense.size()));
    BeamParams p = params;
    p.max_results = std::min<std::size_t>(params.max_results, 20);
    auto hyps = beam_search(model.vocab().encode(qc), vq, vr, model, p);
    const bool any_finished = std::any_of(hyps.begin(), hyps.end(), [](const BeamHypothesis& h) { return h.finished; });
    std::vector<ResponseCandidate> out;
    std::size_t rank = 0;
    for (const auto& h : hyps) {
        ++rank;
        if (any_finished && !h.finished) continue;
        std::string s = model.vocab().decode(h.tokens);
        if (text::trim(s).empty()) continue;
        ResponseCandidate c;
        c.text = std::move(s);
        c.source = CandidateSource::Neural;
        c.provenance = "beam:" + std::to_string(rank);
        c.generator_score = h.normalized();
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace socialbot::nrg
