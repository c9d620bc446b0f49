#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "socialbot/util/jsonl.hpp"

namespace socialbot::ml {

struct LabeledExample {
    std::vector<double> features;
    double label = 0.0;  // 3-level scale {0, 1, 2} for rankers; any real for regression use

    static LabeledExample from_json(const json& j);
    json to_json() const;
};

/// Flat binary regression tree; samples with x[feature] <= threshold go left.
struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const;
};

struct GbrtParams {
    int rounds = 100;
    int depth = 3;
    double learning_rate = 0.1;
    int min_leaf = 1;
};

/// prediction = base_score + learning_rate * sum of tree outputs
class GbrtModel {
public:
    double predict(std::span<const double> x) const;

    double base_score() const { return base_score_; }
    double learning_rate() const { return learning_rate_; }
    std::size_t num_features() const { return num_features_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }
    /// Training mean squared loss after each round; entry 0 is the constant model.
    const std::vector<double>& loss_history() const { return loss_history_; }

    json to_json() const;
    static GbrtModel from_json(const json& j);
    void save(const std::filesystem::path& path) const;
    static GbrtModel load(const std::filesystem::path& path);

    static GbrtModel constant(double base, std::size_t num_features);

private:
    friend GbrtModel train_gbrt(std::span<const LabeledExample>, const GbrtParams&);

    double base_score_ = 0.0;
    double learning_rate_ = 1.0;
    std::size_t num_features_ = 0;
    std::vector<RegressionTree> trees_;
    std::vector<double> loss_history_;
};

/// Least-squares gradient boosting with exact greedy splits. Throws
/// std::invalid_argument on empty data, ragged features or non-finite values.
GbrtModel train_gbrt(std::span<const LabeledExample> data, const GbrtParams& params);

std::vector<LabeledExample> load_examples(const std::filesystem::path& path);

}  // namespace socialbot::ml
