#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cep/features.hpp"
#include "cep/gbt.hpp"
#include "cep/mlp.hpp"

namespace cep {

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

// Standard definitions at the given threshold; F1 is 0 when precision and
// recall are both 0.
Metrics compute_metrics(const std::vector<int>& y_true, const std::vector<double>& y_prob,
                        double threshold = 0.5);

// Deterministic stratified assignment: community names are sorted, the
// order is shuffled with the seed, then each class is dealt round-robin,
// so per-class fold counts differ by at most one and input row order is
// irrelevant. Returns a fold id per input index.
std::vector<int> stratified_kfold(const std::vector<std::string>& names,
                                  const std::vector<int>& labels, int k, std::uint64_t seed);

// Per-community data with fold-independent blocks precomputed; the
// linguistic block is derived per training fold from the token bags.
struct CommunityDataset {
    std::vector<std::string> names;  // sorted ascending
    std::vector<int> labels;
    std::vector<TokenBag> bags;
    std::vector<std::array<double, kMetaFeatureCount>> meta;
    std::vector<std::array<double, kNetworkFeatureCount>> network;

    std::size_t size() const { return names.size(); }
};

CommunityDataset make_dataset(const std::map<std::string, CommunityFeatures>& features,
                              const std::map<std::string, int>& labels);

struct FoldSetting {
    BlockSelection blocks;
    int vocab_size = kLinguisticFeatureCount;
    GbtParams gbt;
    MlpParams mlp;
};

// Everything fitted on one training fold. The vocabulary is rebuilt from
// the fold's bags and the MLP restandardizes on fold statistics, so no
// test-fold information leaks in.
struct TrainedFold {
    Vocabulary vocab;  // empty unless the L block is selected
    bool has_gbt = false;
    bool has_mlp = false;
    TreeEnsemble gbt;
    MlpModel mlp;
    std::vector<std::string> column_names;
};

std::vector<double> dataset_row(const CommunityDataset& ds, std::size_t i, BlockSelection blocks,
                                const Vocabulary* vocab);

TrainedFold train_fold(const CommunityDataset& ds, const std::vector<int>& train_indices,
                       const FoldSetting& setting, bool with_gbt, bool with_mlp);

std::vector<double> fold_predict(const TrainedFold& fold, const CommunityDataset& ds,
                                 const std::vector<int>& indices, const std::string& model);

struct SettingResult {
    std::string model;  // "gbt" or "mlp"
    BlockSelection blocks;
    std::vector<Metrics> fold_metrics;
    Metrics mean;
    Metrics std_dev;  // population std over folds
    std::vector<double> oof_probability;  // aligned with dataset rows
};

struct EvalReport {
    int folds = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> communities;
    std::vector<int> labels;
    std::vector<int> fold_assignment;
    std::vector<SettingResult> settings;

    const SettingResult* find(const std::string& model, const std::string& blocks_name) const;
};

struct AblationConfig {
    int folds = 5;
    std::uint64_t seed = 42;
    std::vector<std::string> models = {"gbt", "mlp"};
    std::vector<std::string> block_subsets = {"L", "M", "N", "M+N", "L+M", "L+M+N"};
    int vocab_size = kLinguisticFeatureCount;
    GbtParams gbt;
    MlpParams mlp;
};

// Cross-validated ablation over feature-block subsets; vocabulary and
// standardization statistics are recomputed inside each training fold.
EvalReport run_ablation(const CommunityDataset& ds, const AblationConfig& cfg);

struct ErrorEntry {
    std::string community;
    double probability = 0.0;
};

struct ErrorAnalysis {
    std::vector<ErrorEntry> false_positives;  // true negatives, descending probability
    std::vector<ErrorEntry> false_negatives;  // true positives, ascending probability
};

ErrorAnalysis top_errors(const EvalReport& report, const std::string& model,
                         const std::string& blocks_name, int n = 10);

std::string report_csv(const EvalReport& report);
std::string report_table(const EvalReport& report);  // Table-2 style text
std::string errors_csv(const ErrorAnalysis& errors);
std::string oof_csv(const EvalReport& report, const std::string& model,
                    const std::string& blocks_name);

}  // namespace cep
