#include "cep/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"
#include "cep/rng.hpp"

namespace cep {

namespace {

// Decision-path bookkeeping for the polynomial-time algorithm; mirrors the
// classic recursive TreeSHAP formulation.
struct PathElement {
    int feature_index = -1;
    double zero_fraction = 0.0;
    double one_fraction = 0.0;
    double pweight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature_index) {
    path[depth].feature_index = feature_index;
    path[depth].zero_fraction = zero_fraction;
    path[depth].one_fraction = one_fraction;
    path[depth].pweight = depth == 0 ? 1.0 : 0.0;
    for (int i = depth - 1; i >= 0; --i) {
        path[i + 1].pweight +=
            one_fraction * path[i].pweight * (i + 1) / static_cast<double>(depth + 1);
        path[i].pweight =
            zero_fraction * path[i].pweight * (depth - i) / static_cast<double>(depth + 1);
    }
}

void unwind_path(PathElement* path, int depth, int index) {
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double next_one_portion = path[depth].pweight;

    for (int i = depth - 1; i >= 0; --i) {
        if (one_fraction != 0.0) {
            const double tmp = path[i].pweight;
            path[i].pweight =
                next_one_portion * (depth + 1) / static_cast<double>((i + 1) * one_fraction);
            next_one_portion =
                tmp - path[i].pweight * zero_fraction * (depth - i) / static_cast<double>(depth + 1);
        } else {
            path[i].pweight =
                path[i].pweight * (depth + 1) / static_cast<double>(zero_fraction * (depth - i));
        }
    }
    for (int i = index; i < depth; ++i) {
        path[i].feature_index = path[i + 1].feature_index;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double next_one_portion = path[depth].pweight;
    double total = 0.0;
    if (one_fraction != 0.0) {
        for (int i = depth - 1; i >= 0; --i) {
            const double tmp = next_one_portion / static_cast<double>((i + 1) * one_fraction);
            total += tmp;
            next_one_portion = path[i].pweight - tmp * zero_fraction * (depth - i);
        }
    } else {
        for (int i = depth - 1; i >= 0; --i)
            total += path[i].pweight / (zero_fraction * (depth - i));
    }
    return total * (depth + 1);
}

int tree_max_depth(const Tree& t, int node, int depth) {
    const TreeNode& n = t.nodes[node];
    if (n.is_leaf()) return depth;
    return std::max(tree_max_depth(t, n.left, depth + 1), tree_max_depth(t, n.right, depth + 1));
}

// leaf_scale folds the ensemble learning rate into leaf values so the
// attribution lands directly in margin space.
void shap_recurse(const Tree& tree, std::span<const double> x, std::vector<double>& phi,
                  double leaf_scale, int node, int depth, PathElement* parent_path,
                  double parent_zero_fraction, double parent_one_fraction,
                  int parent_feature_index) {
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    extend_path(path, depth, parent_zero_fraction, parent_one_fraction, parent_feature_index);

    const TreeNode& n = tree.nodes[node];
    if (n.is_leaf()) {
        for (int i = 1; i <= depth; ++i) {
            const double w = unwound_path_sum(path, depth, i);
            const PathElement& el = path[i];
            phi[el.feature_index] +=
                w * (el.one_fraction - el.zero_fraction) * n.value * leaf_scale;
        }
        return;
    }

    const int hot = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    const int cold = hot == n.left ? n.right : n.left;
    const double hot_zero_fraction = tree.nodes[hot].cover / n.cover;
    const double cold_zero_fraction = tree.nodes[cold].cover / n.cover;
    double incoming_zero_fraction = 1.0;
    double incoming_one_fraction = 1.0;

    // if this feature was already on the path, undo its split and redo it here
    int path_index = 0;
    for (; path_index <= depth; ++path_index) {
        if (path[path_index].feature_index == n.feature) break;
    }
    int unique_depth = depth;
    if (path_index != depth + 1) {
        incoming_zero_fraction = path[path_index].zero_fraction;
        incoming_one_fraction = path[path_index].one_fraction;
        unwind_path(path, unique_depth, path_index);
        --unique_depth;
    }

    shap_recurse(tree, x, phi, leaf_scale, hot, unique_depth + 1, path,
                 hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction, n.feature);
    shap_recurse(tree, x, phi, leaf_scale, cold, unique_depth + 1, path,
                 cold_zero_fraction * incoming_zero_fraction, 0.0, n.feature);
}

double expected_value(const Tree& t, int node) {
    const TreeNode& n = t.nodes[node];
    if (n.is_leaf()) return n.value;
    const double cl = t.nodes[n.left].cover;
    const double cr = t.nodes[n.right].cover;
    return (cl * expected_value(t, n.left) + cr * expected_value(t, n.right)) / (cl + cr);
}

std::vector<double> spearman_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    if (n < 2) return 0.0;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double num = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    return num / std::sqrt(va * vb);
}

}  // namespace

ShapAttribution tree_shap(const TreeEnsemble& model, std::span<const double> row,
                          std::string instance_name) {
    if (!model.trained()) throw StateError("cannot explain an untrained model");
    const int d = model.feature_count();
    if (static_cast<int>(row.size()) != d)
        throw ValidationError("feature row length does not match model width");

    ShapAttribution a;
    a.instance = std::move(instance_name);
    a.contributions.assign(d, 0.0);
    a.base_value = model.base_score;

    for (const Tree& t : model.trees) {
        a.base_value += model.params.learning_rate * expected_value(t, 0);
        const int maxd = tree_max_depth(t, 0, 0) + 2;
        std::vector<PathElement> path(static_cast<std::size_t>(maxd) * (maxd + 1) / 2);
        shap_recurse(t, row, a.contributions, model.params.learning_rate, 0, 0, path.data(), 1.0,
                     1.0, -1);
    }
    a.output_margin = model.margin(row);
    a.output_probability = sigmoid(a.output_margin);
    return a;
}

std::vector<ShapAttribution> tree_shap_batch(const TreeEnsemble& model,
                                             const std::vector<std::vector<double>>& rows,
                                             const std::vector<std::string>& names) {
    std::vector<ShapAttribution> out(rows.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows.size()); ++i) {
        out[i] = tree_shap(model, rows[i],
                           i < static_cast<std::int64_t>(names.size()) ? names[i] : "");
    }
    return out;
}

AggregateShap aggregate_shap(const std::vector<ShapAttribution>& attributions,
                             const std::vector<std::vector<double>>& raw,
                             const std::vector<std::string>& feature_names,
                             int permutations, std::uint64_t seed) {
    if (attributions.empty()) throw ValidationError("no attributions to aggregate");
    const std::size_t n = attributions.size();
    const std::size_t d = feature_names.size();
    if (raw.size() != n) throw ValidationError("raw value rows do not match attributions");

    std::vector<double> observed(d, 0.0);
    for (const auto& a : attributions) {
        for (std::size_t f = 0; f < d; ++f) observed[f] += std::abs(a.contributions[f]);
    }
    for (double& v : observed) v /= static_cast<double>(n);

    // Exchangeability null: shuffle each instance's attribution vector
    // across features and recompute the per-feature mean |shap|.
    std::vector<long long> exceed(d, 0);
    Rng rng(seed);
    std::vector<std::size_t> perm(d);
    for (int round = 0; round < permutations; ++round) {
        std::vector<double> permuted(d, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t i = d; i > 1; --i)
                std::swap(perm[i - 1], perm[rng.uniform_u64(i)]);
            for (std::size_t f = 0; f < d; ++f)
                permuted[f] += std::abs(attributions[r].contributions[perm[f]]);
        }
        for (std::size_t f = 0; f < d; ++f) {
            if (permuted[f] / static_cast<double>(n) >= observed[f]) ++exceed[f];
        }
    }

    AggregateShap out;
    out.ranking.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
        FeatureImportance& fi = out.ranking[f];
        fi.feature = feature_names[f];
        fi.mean_abs_shap = observed[f];
        std::vector<double> phi(n), val(n);
        for (std::size_t r = 0; r < n; ++r) {
            phi[r] = attributions[r].contributions[f];
            val[r] = raw[r][f];
        }
        fi.rank_correlation = pearson(spearman_ranks(val), spearman_ranks(phi));
        fi.p_value = permutations > 0
                         ? (1.0 + static_cast<double>(exceed[f])) /
                               (1.0 + static_cast<double>(permutations))
                         : 1.0;
    }
    std::stable_sort(out.ranking.begin(), out.ranking.end(),
                     [](const FeatureImportance& a, const FeatureImportance& b) {
                         return a.mean_abs_shap > b.mean_abs_shap;
                     });
    return out;
}

std::string beeswarm_csv(const std::vector<ShapAttribution>& attributions,
                         const std::vector<std::vector<double>>& raw,
                         const std::vector<std::string>& feature_names) {
    std::string out = "feature,instance,shap_value,raw_value\n";
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        for (std::size_t r = 0; r < attributions.size(); ++r) {
            out += csv_escape(feature_names[f]);
            out += ',';
            out += csv_escape(attributions[r].instance);
            out += ',';
            out += format_double(attributions[r].contributions[f]);
            out += ',';
            out += format_double(raw[r][f]);
            out += '\n';
        }
    }
    return out;
}

Waterfall waterfall(const ShapAttribution& attribution,
                    const std::vector<std::string>& feature_names, int top_k) {
    if (top_k < 1) throw ValidationError("waterfall top_k must be at least 1");
    const std::size_t d = attribution.contributions.size();
    if (feature_names.size() != d)
        throw ValidationError("feature name count does not match attribution width");

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(attribution.contributions[a]) > std::abs(attribution.contributions[b]);
    });

    Waterfall w;
    w.instance = attribution.instance;
    w.base_probability = sigmoid(attribution.base_value);
    double running_margin = attribution.base_value;
    const std::size_t shown = std::min<std::size_t>(static_cast<std::size_t>(top_k), d);
    for (std::size_t i = 0; i < shown; ++i) {
        const std::size_t f = order[i];
        running_margin += attribution.contributions[f];
        w.entries.push_back(
            {feature_names[f], attribution.contributions[f], sigmoid(running_margin)});
    }
    if (shown < d) {
        double rest = 0.0;
        for (std::size_t i = shown; i < d; ++i) rest += attribution.contributions[order[i]];
        running_margin += rest;
        w.entries.push_back({"other features", rest, sigmoid(running_margin)});
    }
    w.final_probability = sigmoid(running_margin);
    return w;
}

std::string waterfall_json(const Waterfall& w) {
    nlohmann::json j;
    j["instance"] = w.instance;
    j["base"] = w.base_probability;
    j["final"] = w.final_probability;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : w.entries) {
        j["entries"].push_back({{"name", e.name},
                                {"phi", e.phi},
                                {"cumulative_probability", e.cumulative_probability}});
    }
    return j.dump(2);
}

}  // namespace cep
