#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "socialbot/util/jsonl.hpp"

namespace socialbot::ml {

/// Hashed bag of words: (bucket, count) pairs sorted by bucket.
using SparseBow = std::vector<std::pair<std::uint32_t, double>>;

SparseBow hashed_bow(std::string_view text, std::size_t hash_size);

struct DualEncoderParams {
    std::size_t hash_size = 4096;
    std::size_t dim = 32;
    int epochs = 10;
    double learning_rate = 0.05;
    int negatives = 4;
    double margin = 0.2;
    bool shared = true;
    std::uint64_t seed = 7;
};

/// Two-tower text encoder: hashed bag of words, linear projection, L2
/// normalisation. Similarity is the cosine of the two tower outputs.
class DualEncoder {
public:
    DualEncoder() = default;

    /// Gaussian random projections (variance 1/dim). With shared towers,
    /// similarity(x, x) == 1 for any non-empty x.
    static DualEncoder untrained(std::size_t hash_size, std::size_t dim, bool shared, std::uint64_t seed);

    /// Unnormalised tower outputs.
    Eigen::VectorXd project_query(const SparseBow& bow) const;
    Eigen::VectorXd project_doc(const SparseBow& bow) const;

    /// Unit-norm encodings; the zero vector for text without tokens.
    Eigen::VectorXd encode_query(std::string_view text) const;
    Eigen::VectorXd encode_doc(std::string_view text) const;

    /// Cosine in [-1, 1]; 0 when either side has no tokens.
    double similarity(std::string_view a, std::string_view b) const;

    std::size_t hash_size() const { return hash_size_; }
    std::size_t dim() const { return dim_; }
    bool shared() const { return shared_; }

    Eigen::MatrixXd& query_projection() { return query_; }
    Eigen::MatrixXd& doc_projection() { return shared_ ? query_ : doc_; }
    const Eigen::MatrixXd& query_projection() const { return query_; }
    const Eigen::MatrixXd& doc_projection() const { return shared_ ? query_ : doc_; }

    json to_json() const;
    static DualEncoder from_json(const json& j);
    void save(const std::filesystem::path& path) const;
    static DualEncoder load(const std::filesystem::path& path);

private:
    std::size_t hash_size_ = 0;
    std::size_t dim_ = 0;
    bool shared_ = true;
    Eigen::MatrixXd query_;  // dim x hash_size
    Eigen::MatrixXd doc_;    // empty when shared
};

/// One contrastive term: anchor query, its response, a sampled negative.
struct Triplet {
    SparseBow anchor;
    SparseBow positive;
    SparseBow negative;
};

/// Sum over triplets of max(0, margin - cos(a, p) + cos(a, n)).
double contrastive_loss(const DualEncoder& enc, const std::vector<Triplet>& triplets, double margin);

/// Analytic gradient of contrastive_loss. With shared towers all of it lands
/// in `grad_query` and `grad_doc` stays zero.
void contrastive_gradient(const DualEncoder& enc, const std::vector<Triplet>& triplets, double margin,
                          Eigen::MatrixXd& grad_query, Eigen::MatrixXd& grad_doc);

struct DualEncoderReport {
    std::vector<double> epoch_loss;
    double mean_positive = 0.0;
    double mean_negative = 0.0;
};

/// SGD on the margin loss with uniformly sampled in-corpus negatives.
/// Throws std::invalid_argument for fewer than two pairs.
DualEncoder train_dual_encoder(const std::vector<std::pair<std::string, std::string>>& pairs,
                               const DualEncoderParams& params, DualEncoderReport* report = nullptr);

double semantic_similarity(const DualEncoder& enc, std::string_view a, std::string_view b);

}  // namespace socialbot::ml
