#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cep/gbt.hpp"

namespace cep {

// Additive per-feature attribution of one prediction in margin
// (log-odds) space: base_value + sum(contributions) == output_margin.
struct ShapAttribution {
    std::string instance;
    double base_value = 0.0;  // cover-weighted expected margin
    std::vector<double> contributions;
    double output_margin = 0.0;
    double output_probability = 0.0;
};

// Path-dependent TreeSHAP over the covers recorded at training time.
ShapAttribution tree_shap(const TreeEnsemble& model, std::span<const double> row,
                          std::string instance_name = {});

std::vector<ShapAttribution> tree_shap_batch(const TreeEnsemble& model,
                                             const std::vector<std::vector<double>>& rows,
                                             const std::vector<std::string>& names);

struct FeatureImportance {
    std::string feature;
    double mean_abs_shap = 0.0;
    double rank_correlation = 0.0;  // Spearman between raw value and shap value
    double p_value = 1.0;           // permutation test on mean |shap|
};

struct AggregateShap {
    std::vector<FeatureImportance> ranking;  // descending mean |shap|
};

// Summary statistics behind a beeswarm-style plot. `raw` holds the raw
// feature values aligned with `attributions` (same row and column order).
AggregateShap aggregate_shap(const std::vector<ShapAttribution>& attributions,
                             const std::vector<std::vector<double>>& raw,
                             const std::vector<std::string>& feature_names,
                             int permutations = 1000, std::uint64_t seed = 0);

// feature,instance,shap_value,raw_value rows for external plotting.
std::string beeswarm_csv(const std::vector<ShapAttribution>& attributions,
                         const std::vector<std::vector<double>>& raw,
                         const std::vector<std::string>& feature_names);

struct WaterfallEntry {
    std::string name;
    double phi = 0.0;
    double cumulative_probability = 0.0;
};

struct Waterfall {
    std::string instance;
    double base_probability = 0.0;
    std::vector<WaterfallEntry> entries;  // |phi| descending; remainder last
    double final_probability = 0.0;
};

// Top-k decomposition; features beyond top_k collapse into one
// "other features" entry so the chain still reconstructs the output.
Waterfall waterfall(const ShapAttribution& attribution,
                    const std::vector<std::string>& feature_names, int top_k);

std::string waterfall_json(const Waterfall& w);

}  // namespace cep
