#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cep {

// Flat node of a regression tree. Internal nodes have feature >= 0 and
// both children; leaves carry the log-odds increment (before the learning
// rate is applied). cover = number of training rows routed through the
// node, recorded for TreeSHAP.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int default_direction = 0;  // 0 = left on missing; reserved
    double value = 0.0;
    double cover = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> row) const;
};

struct GbtParams {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 2;
    std::uint64_t seed = 0;  // training is exact and needs no randomness
};

struct TreeEnsemble {
    GbtParams params;
    double base_score = 0.0;  // initial log-odds
    std::vector<Tree> trees;
    std::vector<std::string> feature_names;
    std::vector<double> training_deviance;  // mean binomial deviance per round

    bool trained() const { return !feature_names.empty(); }
    int feature_count() const { return static_cast<int>(feature_names.size()); }

    double margin(std::span<const double> row) const;
    double predict_proba(std::span<const double> row) const;

    std::string to_json() const;
    static TreeEnsemble from_json(const std::string& text);
};

// Binomial-deviance boosting: each round fits a depth-limited regression
// tree to the residual y - sigmoid(F) with variance-reduction splits and
// Newton leaf values sum(residual) / sum(p(1-p)).
TreeEnsemble gbt_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                       const GbtParams& params, std::vector<std::string> feature_names = {});

double sigmoid(double z);

}  // namespace cep
