#include "socialbot/ml/dual_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "socialbot/util/tensor_io.hpp"
#include "socialbot/util/text.hpp"

namespace socialbot::ml {

SparseBow hashed_bow(std::string_view s, std::size_t hash_size) {
    std::map<std::uint32_t, double> counts;
    for (const auto& w : text::words(s)) {
        counts[static_cast<std::uint32_t>(text::fnv1a64(w) % hash_size)] += 1.0;
    }
    return SparseBow(counts.begin(), counts.end());
}

namespace {

Eigen::VectorXd project(const Eigen::MatrixXd& p, const SparseBow& bow) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p.rows());
    for (const auto& [col, count] : bow) out += count * p.col(col);
    return out;
}

Eigen::VectorXd unit(const Eigen::VectorXd& v) {
    const double n = v.norm();
    if (n == 0.0) return Eigen::VectorXd::Zero(v.size());
    return v / n;
}

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
    const double nu = u.norm();
    const double nw = w.norm();
    if (nu == 0.0 || nw == 0.0) return 0.0;
    return std::clamp(u.dot(w) / (nu * nw), -1.0, 1.0);
}

// d cos(u, w) / du
Eigen::VectorXd cosine_grad(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
    const double nu = u.norm();
    const double nw = w.norm();
    if (nu == 0.0 || nw == 0.0) return Eigen::VectorXd::Zero(u.size());
    const double c = u.dot(w) / (nu * nw);
    return w / (nu * nw) - c * u / (nu * nu);
}

void scatter(Eigen::MatrixXd& g, const Eigen::VectorXd& dv, const SparseBow& bow, double scale) {
    for (const auto& [col, count] : bow) g.col(col) += scale * count * dv;
}

}  // namespace

DualEncoder DualEncoder::untrained(std::size_t hash_size, std::size_t dim, bool shared, std::uint64_t seed) {
    if (hash_size == 0 || dim == 0) throw std::invalid_argument("dual encoder needs positive sizes");
    DualEncoder e;
    e.hash_size_ = hash_size;
    e.dim_ = dim;
    e.shared_ = shared;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
    auto fill = [&](Eigen::MatrixXd& m) {
        m.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(hash_size));
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = normal(rng);
        }
    };
    fill(e.query_);
    if (!shared) fill(e.doc_);
    return e;
}

Eigen::VectorXd DualEncoder::project_query(const SparseBow& bow) const { return project(query_, bow); }
Eigen::VectorXd DualEncoder::project_doc(const SparseBow& bow) const { return project(doc_projection(), bow); }

Eigen::VectorXd DualEncoder::encode_query(std::string_view s) const {
    return unit(project_query(hashed_bow(s, hash_size_)));
}

Eigen::VectorXd DualEncoder::encode_doc(std::string_view s) const {
    return unit(project_doc(hashed_bow(s, hash_size_)));
}

double DualEncoder::similarity(std::string_view a, std::string_view b) const {
    return cosine(project_query(hashed_bow(a, hash_size_)), project_doc(hashed_bow(b, hash_size_)));
}

json DualEncoder::to_json() const {
    json j{{"schema_version", 1}, {"kind", "dual_encoder"}, {"hash_size", hash_size_},
           {"dim", dim_}, {"shared", shared_}, {"query", matrix_to_json(query_)}};
    if (!shared_) j["doc"] = matrix_to_json(doc_);
    return j;
}

DualEncoder DualEncoder::from_json(const json& j) {
    if (j.value("schema_version", 0) != 1 || j.value("kind", "") != "dual_encoder") {
        throw DataError("not a schema_version=1 dual encoder");
    }
    DualEncoder e;
    e.hash_size_ = j.at("hash_size").get<std::size_t>();
    e.dim_ = j.at("dim").get<std::size_t>();
    e.shared_ = j.at("shared").get<bool>();
    e.query_ = matrix_from_json(j.at("query"));
    if (!e.shared_) e.doc_ = matrix_from_json(j.at("doc"));
    return e;
}

void DualEncoder::save(const std::filesystem::path& path) const { write_text_file(path, to_json().dump()); }
DualEncoder DualEncoder::load(const std::filesystem::path& path) { return from_json(load_json(path)); }

double contrastive_loss(const DualEncoder& enc, const std::vector<Triplet>& triplets, double margin) {
    double total = 0.0;
    for (const auto& t : triplets) {
        const auto a = enc.project_query(t.anchor);
        const double pos = cosine(a, enc.project_doc(t.positive));
        const double neg = cosine(a, enc.project_doc(t.negative));
        total += std::max(0.0, margin - pos + neg);
    }
    return total;
}

void contrastive_gradient(const DualEncoder& enc, const std::vector<Triplet>& triplets, double margin,
                          Eigen::MatrixXd& grad_query, Eigen::MatrixXd& grad_doc) {
    const auto rows = static_cast<Eigen::Index>(enc.dim());
    const auto cols = static_cast<Eigen::Index>(enc.hash_size());
    grad_query = Eigen::MatrixXd::Zero(rows, cols);
    grad_doc = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::MatrixXd& doc_target = enc.shared() ? grad_query : grad_doc;
    for (const auto& t : triplets) {
        const auto a = enc.project_query(t.anchor);
        const auto p = enc.project_doc(t.positive);
        const auto n = enc.project_doc(t.negative);
        if (margin - cosine(a, p) + cosine(a, n) <= 0.0) continue;
        // loss = margin - cos(a,p) + cos(a,n)
        const Eigen::VectorXd da = cosine_grad(a, n) - cosine_grad(a, p);
        scatter(grad_query, da, t.anchor, 1.0);
        scatter(doc_target, cosine_grad(p, a), t.positive, -1.0);
        scatter(doc_target, cosine_grad(n, a), t.negative, 1.0);
    }
}

DualEncoder train_dual_encoder(const std::vector<std::pair<std::string, std::string>>& pairs,
                               const DualEncoderParams& params, DualEncoderReport* report) {
    if (pairs.size() < 2) throw std::invalid_argument("train_dual_encoder: need at least two pairs");
    DualEncoder enc = DualEncoder::untrained(params.hash_size, params.dim, params.shared, params.seed);
    std::vector<SparseBow> queries;
    std::vector<SparseBow> responses;
    for (const auto& [q, r] : pairs) {
        queries.push_back(hashed_bow(q, params.hash_size));
        responses.push_back(hashed_bow(r, params.hash_size));
    }
    std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 2);

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (const std::size_t i : order) {
            std::vector<Triplet> batch;
            for (int k = 0; k < params.negatives; ++k) {
                std::size_t j = pick(rng);
                if (j >= i) ++j;
                batch.push_back({queries[i], responses[i], responses[j]});
            }
            epoch_loss += contrastive_loss(enc, batch, params.margin);
            // sparse update: only touched columns change
            for (const auto& t : batch) {
                const auto a = enc.project_query(t.anchor);
                const auto p = enc.project_doc(t.positive);
                const auto n = enc.project_doc(t.negative);
                if (params.margin - cosine(a, p) + cosine(a, n) <= 0.0) continue;
                const Eigen::VectorXd da = cosine_grad(a, n) - cosine_grad(a, p);
                const Eigen::VectorXd dp = -cosine_grad(p, a);
                const Eigen::VectorXd dn = cosine_grad(n, a);
                scatter(enc.query_projection(), da, t.anchor, -params.learning_rate);
                scatter(enc.doc_projection(), dp, t.positive, -params.learning_rate);
                scatter(enc.doc_projection(), dn, t.negative, -params.learning_rate);
            }
        }
        if (report != nullptr) report->epoch_loss.push_back(epoch_loss);
    }
    if (report != nullptr) {
        double pos = 0.0;
        double neg = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto a = enc.project_query(queries[i]);
            pos += cosine(a, enc.project_doc(responses[i]));
            neg += cosine(a, enc.project_doc(responses[(i + 1) % pairs.size()]));
        }
        report->mean_positive = pos / static_cast<double>(pairs.size());
        report->mean_negative = neg / static_cast<double>(pairs.size());
    }
    return enc;
}

double semantic_similarity(const DualEncoder& enc, std::string_view a, std::string_view b) {
    return enc.similarity(a, b);
}

}  // namespace socialbot::ml
