#include "cep/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cep/errors.hpp"

namespace cep {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

using nlohmann::json;

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Exact variance-reduction search over sorted unique values. Features are
// scanned in ascending index and thresholds in ascending value, and only
// strictly better gains are accepted, so equal-gain ties resolve to the
// lowest feature index, then the lowest threshold.
SplitChoice find_best_split(const std::vector<std::vector<double>>& X,
                            const std::vector<double>& residual, const std::vector<int>& idx,
                            int min_samples_leaf) {
    SplitChoice best;
    const int n = static_cast<int>(idx.size());
    if (n < 2 * min_samples_leaf) return best;
    const int d = static_cast<int>(X[idx[0]].size());

    double total_sum = 0.0;
    for (int i : idx) total_sum += residual[i];

    std::vector<std::pair<double, double>> col(n);  // (x, residual)
    for (int f = 0; f < d; ++f) {
        for (int i = 0; i < n; ++i) col[i] = {X[idx[i]][f], residual[idx[i]]};
        std::sort(col.begin(), col.end());
        if (col.front().first == col.back().first) continue;  // constant feature

        double left_sum = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            left_sum += col[i].second;
            if (col[i].first == col[i + 1].first) continue;
            const int n_left = i + 1;
            const int n_right = n - n_left;
            if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
            const double right_sum = total_sum - left_sum;
            // variance reduction up to a constant: sum^2/n improvements
            const double gain = left_sum * left_sum / n_left +
                                right_sum * right_sum / n_right -
                                total_sum * total_sum / n;
            if (gain > best.gain + 1e-12) {
                best.feature = f;
                best.threshold = 0.5 * (col[i].first + col[i + 1].first);
                best.gain = gain;
            }
        }
    }
    return best;
}

int build_node(Tree& tree, const std::vector<std::vector<double>>& X,
               const std::vector<double>& residual, const std::vector<double>& hessian,
               std::vector<int> idx, int depth, const GbtParams& params) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].cover = static_cast<double>(idx.size());

    SplitChoice split;
    if (depth < params.max_depth)
        split = find_best_split(X, residual, idx, params.min_samples_leaf);

    if (split.feature < 0) {
        double r_sum = 0.0, h_sum = 0.0;
        for (int i : idx) {
            r_sum += residual[i];
            h_sum += hessian[i];
        }
        tree.nodes[node_id].value = r_sum / std::max(h_sum, 1e-16);
        return node_id;
    }

    std::vector<int> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (int i : idx) {
        if (X[i][split.feature] <= split.threshold) left_idx.push_back(i);
        else right_idx.push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = split.threshold;
    const int left = build_node(tree, X, residual, hessian, std::move(left_idx), depth + 1, params);
    tree.nodes[node_id].left = left;
    const int right =
        build_node(tree, X, residual, hessian, std::move(right_idx), depth + 1, params);
    tree.nodes[node_id].right = right;
    return node_id;
}

json node_to_json(const Tree& tree, int id) {
    const TreeNode& n = tree.nodes[id];
    json j;
    j["cover"] = n.cover;
    if (n.is_leaf()) {
        j["value"] = n.value;
    } else {
        j["feature"] = n.feature;
        j["threshold"] = n.threshold;
        j["default"] = n.default_direction == 0 ? "left" : "right";
        j["left"] = node_to_json(tree, n.left);
        j["right"] = node_to_json(tree, n.right);
    }
    return j;
}

int node_from_json(Tree& tree, const json& j) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].cover = j.at("cover").get<double>();
    if (j.contains("feature")) {
        tree.nodes[id].feature = j.at("feature").get<int>();
        tree.nodes[id].threshold = j.at("threshold").get<double>();
        tree.nodes[id].default_direction = j.value("default", "left") == std::string("right");
        const int left = node_from_json(tree, j.at("left"));
        tree.nodes[id].left = left;
        const int right = node_from_json(tree, j.at("right"));
        tree.nodes[id].right = right;
    } else {
        tree.nodes[id].value = j.at("value").get<double>();
    }
    return id;
}

}  // namespace

double Tree::predict(std::span<const double> row) const {
    int id = 0;
    while (!nodes[id].is_leaf()) {
        const TreeNode& n = nodes[id];
        const double x = row[static_cast<std::size_t>(n.feature)];
        if (std::isnan(x)) id = n.default_direction == 0 ? n.left : n.right;
        else id = (x <= n.threshold) ? n.left : n.right;
    }
    return nodes[id].value;
}

double TreeEnsemble::margin(std::span<const double> row) const {
    if (!trained()) throw StateError("model has not been trained");
    if (row.size() != feature_names.size())
        throw ValidationError("feature row length " + std::to_string(row.size()) +
                              " does not match model width " +
                              std::to_string(feature_names.size()));
    double m = base_score;
    for (const Tree& t : trees) m += params.learning_rate * t.predict(row);
    return m;
}

double TreeEnsemble::predict_proba(std::span<const double> row) const {
    return sigmoid(margin(row));
}

TreeEnsemble gbt_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                       const GbtParams& params, std::vector<std::string> feature_names) {
    const std::size_t n = X.size();
    if (n < 2 || y.size() != n) throw ValidationError("training requires at least two rows");
    const std::size_t d = X[0].size();
    if (d == 0) throw ValidationError("training requires at least one feature");
    long long positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (X[i].size() != d) throw ValidationError("ragged feature matrix");
        for (double v : X[i]) {
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
        }
        if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");
        positives += y[i];
    }
    if (positives == 0 || positives == static_cast<long long>(n))
        throw ValidationError("training requires both classes to be present");
    if (params.n_trees < 1 || params.max_depth < 1 || params.learning_rate <= 0.0 ||
        params.min_samples_leaf < 1)
        throw ValidationError("invalid boosting parameters");

    TreeEnsemble model;
    model.params = params;
    if (feature_names.empty()) {
        for (std::size_t f = 0; f < d; ++f) feature_names.push_back("f" + std::to_string(f));
    } else if (feature_names.size() != d) {
        throw ValidationError("feature name count does not match matrix width");
    }
    model.feature_names = std::move(feature_names);

    double p_hat = static_cast<double>(positives) / static_cast<double>(n);
    p_hat = std::clamp(p_hat, 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(p_hat / (1.0 - p_hat));

    std::vector<double> margin(n, model.base_score);
    std::vector<double> residual(n), hessian(n);
    std::vector<int> all_idx(n);
    std::iota(all_idx.begin(), all_idx.end(), 0);

    model.trees.reserve(params.n_trees);
    model.training_deviance.reserve(params.n_trees);
    for (int round = 0; round < params.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            residual[i] = static_cast<double>(y[i]) - p;
            hessian[i] = std::max(p * (1.0 - p), 1e-16);
        }
        Tree tree;
        build_node(tree, X, residual, hessian, all_idx, 0, params);
        for (std::size_t i = 0; i < n; ++i)
            margin[i] += params.learning_rate * tree.predict(X[i]);
        model.trees.push_back(std::move(tree));

        double deviance = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = std::clamp(sigmoid(margin[i]), 1e-15, 1.0 - 1e-15);
            deviance += y[i] ? -2.0 * std::log(p) : -2.0 * std::log(1.0 - p);
        }
        model.training_deviance.push_back(deviance / static_cast<double>(n));
    }
    return model;
}

std::string TreeEnsemble::to_json() const {
    json j;
    j["format"] = "cep-gbt";
    j["version"] = 1;
    j["params"] = {{"n_trees", params.n_trees},
                   {"max_depth", params.max_depth},
                   {"learning_rate", params.learning_rate},
                   {"min_samples_leaf", params.min_samples_leaf},
                   {"seed", params.seed}};
    j["base_score"] = base_score;
    j["feature_names"] = feature_names;
    j["training_deviance"] = training_deviance;
    j["trees"] = json::array();
    for (const Tree& t : trees) j["trees"].push_back(node_to_json(t, 0));
    return j.dump(2);
}

TreeEnsemble TreeEnsemble::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || j.value("format", "") != std::string("cep-gbt"))
        throw FormatError("not a gbt model document");
    TreeEnsemble m;
    const json& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<int>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.learning_rate = p.at("learning_rate").get<double>();
    m.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.base_score = j.at("base_score").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (j.contains("training_deviance"))
        m.training_deviance = j.at("training_deviance").get<std::vector<double>>();
    for (const json& t : j.at("trees")) {
        Tree tree;
        node_from_json(tree, t);
        m.trees.push_back(std::move(tree));
    }
    return m;
}

}  // namespace cep
