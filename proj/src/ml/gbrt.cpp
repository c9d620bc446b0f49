#include "socialbot/ml/gbrt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace socialbot::ml {

LabeledExample LabeledExample::from_json(const json& j) {
    LabeledExample e;
    e.features = j.at("features").get<std::vector<double>>();
    e.label = j.at("label").get<double>();
    return e;
}

json LabeledExample::to_json() const { return json{{"features", features}, {"label", label}}; }

double RegressionTree::predict(std::span<const double> x) const {
    if (nodes.empty()) return 0.0;
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

double GbrtModel::predict(std::span<const double> x) const {
    if (x.size() != num_features_) {
        throw std::invalid_argument("gbrt_predict: expected " + std::to_string(num_features_) +
                                    " features, got " + std::to_string(x.size()));
    }
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return base_score_ + learning_rate_ * sum;
}

GbrtModel GbrtModel::constant(double base, std::size_t num_features) {
    GbrtModel m;
    m.base_score_ = base;
    m.num_features_ = num_features;
    return m;
}

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(std::span<const LabeledExample> data, const std::vector<double>& residual,
                const GbrtParams& p)
        : data_(data), residual_(residual), params_(p) {}

    RegressionTree build() {
        std::vector<std::size_t> all(data_.size());
        std::iota(all.begin(), all.end(), 0);
        RegressionTree tree;
        grow(tree, all, 0);
        return tree;
    }

private:
    double mean_residual(const std::vector<std::size_t>& idx) const {
        double s = 0.0;
        for (auto i : idx) s += residual_[i];
        return idx.empty() ? 0.0 : s / static_cast<double>(idx.size());
    }

    Split best_split(const std::vector<std::size_t>& idx) const {
        Split best;
        const std::size_t n = idx.size();
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
        if (n < 2 * min_leaf) return best;
        double total = 0.0;
        for (auto i : idx) total += residual_[i];
        const double parent = total * total / static_cast<double>(n);
        const std::size_t dims = data_[idx.front()].features.size();
        std::vector<std::size_t> order(idx);
        for (std::size_t f = 0; f < dims; ++f) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return data_[a].features[f] < data_[b].features[f];
            });
            double left = 0.0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                left += residual_[order[k]];
                const double xa = data_[order[k]].features[f];
                const double xb = data_[order[k + 1]].features[f];
                if (!(xa < xb)) continue;
                const std::size_t nl = k + 1;
                const std::size_t nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double right = total - left;
                const double gain = left * left / static_cast<double>(nl) +
                                    right * right / static_cast<double>(nr) - parent;
                if (gain > best.gain + 1e-12) {
                    double thr = xa + (xb - xa) / 2.0;
                    if (!(thr < xb)) thr = xa;
                    best = {static_cast<int>(f), thr, gain};
                }
            }
        }
        return best;
    }

    int grow(RegressionTree& tree, const std::vector<std::size_t>& idx, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        Split s;
        if (depth < params_.depth) s = best_split(idx);
        if (s.feature < 0) {
            tree.nodes[static_cast<std::size_t>(id)].value = mean_residual(idx);
            return id;
        }
        std::vector<std::size_t> l;
        std::vector<std::size_t> r;
        for (auto i : idx) {
            (data_[i].features[static_cast<std::size_t>(s.feature)] <= s.threshold ? l : r).push_back(i);
        }
        const int left = grow(tree, l, depth + 1);
        const int right = grow(tree, r, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = s.feature;
        node.threshold = s.threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    std::span<const LabeledExample> data_;
    const std::vector<double>& residual_;
    const GbrtParams& params_;
};

double mse(std::span<const LabeledExample> data, const std::vector<double>& pred) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double d = data[i].label - pred[i];
        s += d * d;
    }
    return s / static_cast<double>(data.size());
}

}  // namespace

GbrtModel train_gbrt(std::span<const LabeledExample> data, const GbrtParams& params) {
    if (data.empty()) throw std::invalid_argument("train_gbrt: empty data");
    if (params.rounds < 0 || params.depth < 0 || !(params.learning_rate > 0.0)) {
        throw std::invalid_argument("train_gbrt: invalid parameters");
    }
    const std::size_t dims = data.front().features.size();
    for (const auto& ex : data) {
        if (ex.features.size() != dims) throw std::invalid_argument("train_gbrt: inconsistent feature dimension");
        if (!std::isfinite(ex.label)) throw std::invalid_argument("train_gbrt: non-finite label");
        for (double v : ex.features) {
            if (!std::isfinite(v)) throw std::invalid_argument("train_gbrt: NaN or infinite feature");
        }
    }

    GbrtModel m;
    m.num_features_ = dims;
    m.learning_rate_ = params.learning_rate;
    double sum = 0.0;
    for (const auto& ex : data) sum += ex.label;
    m.base_score_ = sum / static_cast<double>(data.size());

    std::vector<double> pred(data.size(), m.base_score_);
    std::vector<double> residual(data.size());
    m.loss_history_.push_back(mse(data, pred));
    for (int round = 0; round < params.rounds; ++round) {
        for (std::size_t i = 0; i < data.size(); ++i) residual[i] = data[i].label - pred[i];
        RegressionTree tree = TreeBuilder(data, residual, params).build();
        for (std::size_t i = 0; i < data.size(); ++i) {
            pred[i] += params.learning_rate * tree.predict(data[i].features);
        }
        m.trees_.push_back(std::move(tree));
        m.loss_history_.push_back(mse(data, pred));
    }
    return m;
}

json GbrtModel::to_json() const {
    json trees = json::array();
    for (const auto& t : trees_) {
        json nodes = json::array();
        for (const auto& n : t.nodes) {
            nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left},
                             {"right", n.right}, {"value", n.value}});
        }
        trees.push_back(json{{"nodes", nodes}});
    }
    return json{{"schema_version", 1},       {"kind", "gbrt"},
                {"base_score", base_score_}, {"learning_rate", learning_rate_},
                {"num_features", num_features_}, {"trees", trees},
                {"loss_history", loss_history_}};
}

GbrtModel GbrtModel::from_json(const json& j) {
    if (j.value("schema_version", 0) != 1 || j.value("kind", "") != "gbrt") {
        throw DataError("not a schema_version=1 gbrt model");
    }
    GbrtModel m;
    m.base_score_ = j.at("base_score").get<double>();
    m.learning_rate_ = j.at("learning_rate").get<double>();
    m.num_features_ = j.at("num_features").get<std::size_t>();
    for (const auto& t : j.at("trees")) {
        RegressionTree tree;
        for (const auto& n : t.at("nodes")) {
            RegressionTree::Node node;
            node.feature = n.at("feature").get<int>();
            node.threshold = n.at("threshold").get<double>();
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
            node.value = n.at("value").get<double>();
            tree.nodes.push_back(node);
        }
        m.trees_.push_back(std::move(tree));
    }
    if (j.contains("loss_history")) m.loss_history_ = j.at("loss_history").get<std::vector<double>>();
    return m;
}

void GbrtModel::save(const std::filesystem::path& path) const { write_text_file(path, to_json().dump()); }

GbrtModel GbrtModel::load(const std::filesystem::path& path) { return from_json(load_json(path)); }

std::vector<LabeledExample> load_examples(const std::filesystem::path& path) {
    std::vector<LabeledExample> out;
    read_jsonl(path, [&](const json& j, std::size_t) { out.push_back(LabeledExample::from_json(j)); });
    return out;
}

}  // namespace socialbot::ml
