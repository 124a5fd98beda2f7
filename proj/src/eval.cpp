#include "cep/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"
#include "cep/rng.hpp"

namespace cep {

namespace {

// Per-setting model seeds derive from the report seed by a fixed formula
// so reruns are reproducible and settings stay independent.
std::uint64_t derive_seed(std::uint64_t base, std::size_t setting, int fold) {
    return base * 1000003ULL + static_cast<std::uint64_t>(setting) * 101ULL +
           static_cast<std::uint64_t>(fold) + 1ULL;
}

Metrics metrics_mean(const std::vector<Metrics>& folds) {
    Metrics m;
    if (folds.empty()) return m;
    for (const Metrics& f : folds) {
        m.precision += f.precision;
        m.recall += f.recall;
        m.f1 += f.f1;
        m.accuracy += f.accuracy;
    }
    const double n = static_cast<double>(folds.size());
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
    m.accuracy /= n;
    return m;
}

Metrics metrics_population_std(const std::vector<Metrics>& folds, const Metrics& mean) {
    Metrics s;
    if (folds.empty()) return s;
    for (const Metrics& f : folds) {
        s.precision += (f.precision - mean.precision) * (f.precision - mean.precision);
        s.recall += (f.recall - mean.recall) * (f.recall - mean.recall);
        s.f1 += (f.f1 - mean.f1) * (f.f1 - mean.f1);
        s.accuracy += (f.accuracy - mean.accuracy) * (f.accuracy - mean.accuracy);
    }
    const double n = static_cast<double>(folds.size());
    s.precision = std::sqrt(s.precision / n);
    s.recall = std::sqrt(s.recall / n);
    s.f1 = std::sqrt(s.f1 / n);
    s.accuracy = std::sqrt(s.accuracy / n);
    return s;
}

std::string mean_pm_std(double mean, double sd) {
    return format_double(mean) + "+-" + format_double(sd);
}

}  // namespace

Metrics compute_metrics(const std::vector<int>& y_true, const std::vector<double>& y_prob,
                        double threshold) {
    if (y_true.empty() || y_true.size() != y_prob.size())
        throw ValidationError("metrics require equally sized non-empty inputs");
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool predicted = y_prob[i] >= threshold;
        if (predicted && y_true[i] == 1) ++tp;
        else if (predicted && y_true[i] == 0) ++fp;
        else if (!predicted && y_true[i] == 0) ++tn;
        else ++fn;
    }
    Metrics m;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(y_true.size());
    return m;
}

std::vector<int> stratified_kfold(const std::vector<std::string>& names,
                                  const std::vector<int>& labels, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("stratified folds require k >= 2");
    if (names.size() != labels.size()) throw ValidationError("names and labels must align");

    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
    Rng rng(seed);
    rng.shuffle(order);

    long long class_count[2] = {0, 0};
    for (int l : labels) {
        if (l != 0 && l != 1) throw ValidationError("labels must be 0 or 1");
        ++class_count[l];
    }
    for (int c = 0; c < 2; ++c) {
        if (class_count[c] < k)
            throw ConfigError("class " + std::to_string(c) + " has only " +
                              std::to_string(class_count[c]) + " members for " +
                              std::to_string(k) + " folds");
    }

    std::vector<int> fold(names.size(), -1);
    int dealt[2] = {0, 0};
    for (std::size_t idx : order) {
        const int cls = labels[idx];
        fold[idx] = dealt[cls] % k;
        ++dealt[cls];
    }
    return fold;
}

CommunityDataset make_dataset(const std::map<std::string, CommunityFeatures>& features,
                              const std::map<std::string, int>& labels) {
    CommunityDataset ds;
    for (const auto& [community, label] : labels) {
        auto it = features.find(community);
        if (it == features.end())
            throw ValidationError("missing feature blocks for community: " + community);
        ds.names.push_back(community);
        ds.labels.push_back(label);
        ds.bags.push_back(it->second.text);
        ds.meta.push_back(it->second.meta.values);
        ds.network.push_back(it->second.network);
    }
    return ds;
}

std::vector<double> dataset_row(const CommunityDataset& ds, std::size_t i, BlockSelection blocks,
                                const Vocabulary* vocab) {
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(blocks.column_count()));
    if (blocks.L) {
        if (!vocab) throw ValidationError("linguistic block requested without a vocabulary");
        auto l = tfidf_vector(ds.bags[i], *vocab);
        row.insert(row.end(), l.begin(), l.end());
    }
    if (blocks.M) row.insert(row.end(), ds.meta[i].begin(), ds.meta[i].end());
    if (blocks.N) row.insert(row.end(), ds.network[i].begin(), ds.network[i].end());
    return row;
}

TrainedFold train_fold(const CommunityDataset& ds, const std::vector<int>& train_indices,
                       const FoldSetting& setting, bool with_gbt, bool with_mlp) {
    TrainedFold out;
    if (setting.blocks.L) {
        std::vector<const TokenBag*> bags;
        bags.reserve(train_indices.size());
        for (int i : train_indices) bags.push_back(&ds.bags[i]);
        out.vocab = build_vocabulary(bags, setting.vocab_size);
    }

    if (setting.blocks.L) {
        for (int i = 0; i < kLinguisticFeatureCount; ++i) {
            out.column_names.push_back(i < static_cast<int>(out.vocab.tokens.size())
                                           ? "L_" + out.vocab.tokens[i]
                                           : "L_pad_" + std::to_string(i));
        }
    }
    if (setting.blocks.M) {
        for (const char* n : kMetaFeatureNames) out.column_names.push_back(std::string("M_") + n);
    }
    if (setting.blocks.N) {
        for (const char* n : kNetworkFeatureNames)
            out.column_names.push_back(std::string("N_") + n);
    }

    std::vector<std::vector<double>> X;
    std::vector<int> y;
    X.reserve(train_indices.size());
    y.reserve(train_indices.size());
    for (int i : train_indices) {
        X.push_back(dataset_row(ds, i, setting.blocks, setting.blocks.L ? &out.vocab : nullptr));
        y.push_back(ds.labels[i]);
    }

    if (with_gbt) {
        out.gbt = gbt_train(X, y, setting.gbt, out.column_names);
        out.has_gbt = true;
    }
    if (with_mlp) {
        out.mlp = mlp_train(X, y, setting.mlp, out.column_names);
        out.has_mlp = true;
    }
    return out;
}

std::vector<double> fold_predict(const TrainedFold& fold, const CommunityDataset& ds,
                                 const std::vector<int>& indices, const std::string& model) {
    BlockSelection blocks;
    for (const auto& name : fold.column_names) {
        if (name.rfind("L_", 0) == 0) blocks.L = true;
        else if (name.rfind("M_", 0) == 0) blocks.M = true;
        else if (name.rfind("N_", 0) == 0) blocks.N = true;
    }
    std::vector<double> out;
    out.reserve(indices.size());
    for (int i : indices) {
        const auto row = dataset_row(ds, i, blocks, blocks.L ? &fold.vocab : nullptr);
        if (model == "gbt") {
            if (!fold.has_gbt) throw StateError("fold has no trained gbt");
            out.push_back(fold.gbt.predict_proba(row));
        } else if (model == "mlp") {
            if (!fold.has_mlp) throw StateError("fold has no trained mlp");
            out.push_back(fold.mlp.predict_proba(row));
        } else {
            throw ConfigError("unknown model '" + model + "'");
        }
    }
    return out;
}

EvalReport run_ablation(const CommunityDataset& ds, const AblationConfig& cfg) {
    EvalReport report;
    report.folds = cfg.folds;
    report.seed = cfg.seed;
    report.communities = ds.names;
    report.labels = ds.labels;
    report.fold_assignment = stratified_kfold(ds.names, ds.labels, cfg.folds, cfg.seed);

    std::vector<std::vector<int>> fold_members(cfg.folds);
    for (std::size_t i = 0; i < ds.size(); ++i)
        fold_members[report.fold_assignment[i]].push_back(static_cast<int>(i));

    std::size_t setting_index = 0;
    for (const std::string& model : cfg.models) {
        if (model != "gbt" && model != "mlp") throw ConfigError("unknown model '" + model + "'");
        for (const std::string& subset : cfg.block_subsets) {
            SettingResult result;
            result.model = model;
            result.blocks = parse_blocks(subset);
            result.oof_probability.assign(ds.size(), 0.0);

            for (int f = 0; f < cfg.folds; ++f) {
                std::vector<int> train_idx;
                for (int g = 0; g < cfg.folds; ++g) {
                    if (g == f) continue;
                    train_idx.insert(train_idx.end(), fold_members[g].begin(),
                                     fold_members[g].end());
                }
                std::sort(train_idx.begin(), train_idx.end());

                FoldSetting setting;
                setting.blocks = result.blocks;
                setting.vocab_size = cfg.vocab_size;
                setting.gbt = cfg.gbt;
                setting.gbt.seed = derive_seed(cfg.seed, setting_index, f);
                setting.mlp = cfg.mlp;
                setting.mlp.seed = derive_seed(cfg.seed, setting_index, f);

                const TrainedFold trained =
                    train_fold(ds, train_idx, setting, model == "gbt", model == "mlp");
                const std::vector<double> probs =
                    fold_predict(trained, ds, fold_members[f], model);

                std::vector<int> y_true;
                y_true.reserve(fold_members[f].size());
                for (std::size_t j = 0; j < fold_members[f].size(); ++j) {
                    y_true.push_back(ds.labels[fold_members[f][j]]);
                    result.oof_probability[fold_members[f][j]] = probs[j];
                }
                result.fold_metrics.push_back(compute_metrics(y_true, probs));
            }
            result.mean = metrics_mean(result.fold_metrics);
            result.std_dev = metrics_population_std(result.fold_metrics, result.mean);
            report.settings.push_back(std::move(result));
            ++setting_index;
        }
    }
    return report;
}

const SettingResult* EvalReport::find(const std::string& model,
                                      const std::string& blocks_name) const {
    for (const SettingResult& s : settings) {
        if (s.model == model && s.blocks.name() == blocks_name) return &s;
    }
    return nullptr;
}

ErrorAnalysis top_errors(const EvalReport& report, const std::string& model,
                         const std::string& blocks_name, int n) {
    const SettingResult* setting = report.find(model, blocks_name);
    if (!setting)
        throw ValidationError("no evaluated setting " + model + " / " + blocks_name);

    std::vector<ErrorEntry> negatives, positives;
    for (std::size_t i = 0; i < report.communities.size(); ++i) {
        const ErrorEntry e{report.communities[i], setting->oof_probability[i]};
        if (report.labels[i] == 0) negatives.push_back(e);
        else positives.push_back(e);
    }
    std::sort(negatives.begin(), negatives.end(), [](const ErrorEntry& a, const ErrorEntry& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.community < b.community;
    });
    std::sort(positives.begin(), positives.end(), [](const ErrorEntry& a, const ErrorEntry& b) {
        if (a.probability != b.probability) return a.probability < b.probability;
        return a.community < b.community;
    });
    if (static_cast<int>(negatives.size()) > n) negatives.resize(n);
    if (static_cast<int>(positives.size()) > n) positives.resize(n);
    return {std::move(negatives), std::move(positives)};
}

std::string report_csv(const EvalReport& report) {
    std::string out = "model,blocks,fold,precision,recall,f1,accuracy\n";
    auto add_row = [&](const std::string& model, const std::string& blocks,
                       const std::string& fold, const Metrics& m) {
        out += model + "," + blocks + "," + fold + "," + format_double(m.precision) + "," +
               format_double(m.recall) + "," + format_double(m.f1) + "," +
               format_double(m.accuracy) + "\n";
    };
    for (const SettingResult& s : report.settings) {
        for (std::size_t f = 0; f < s.fold_metrics.size(); ++f)
            add_row(s.model, s.blocks.name(), std::to_string(f), s.fold_metrics[f]);
        add_row(s.model, s.blocks.name(), "mean", s.mean);
        add_row(s.model, s.blocks.name(), "std", s.std_dev);
    }
    return out;
}

std::string report_table(const EvalReport& report) {
    std::string out;
    out += "Model  Features  Precision            Recall               F1-Score             Accuracy\n";
    for (const SettingResult& s : report.settings) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-6s %-9s %-20s %-20s %-20s %-20s\n",
                      s.model == "gbt" ? "GBT" : "MLP", s.blocks.name().c_str(),
                      mean_pm_std(s.mean.precision, s.std_dev.precision).c_str(),
                      mean_pm_std(s.mean.recall, s.std_dev.recall).c_str(),
                      mean_pm_std(s.mean.f1, s.std_dev.f1).c_str(),
                      mean_pm_std(s.mean.accuracy, s.std_dev.accuracy).c_str());
        out += line;
    }
    return out;
}

std::string errors_csv(const ErrorAnalysis& errors) {
    std::string out = "kind,community,probability\n";
    for (const ErrorEntry& e : errors.false_positives)
        out += "false_positive," + csv_escape(e.community) + "," + format_double(e.probability) +
               "\n";
    for (const ErrorEntry& e : errors.false_negatives)
        out += "false_negative," + csv_escape(e.community) + "," + format_double(e.probability) +
               "\n";
    return out;
}

std::string oof_csv(const EvalReport& report, const std::string& model,
                    const std::string& blocks_name) {
    const SettingResult* setting = report.find(model, blocks_name);
    if (!setting)
        throw ValidationError("no evaluated setting " + model + " / " + blocks_name);
    std::string out = "community,label,fold,probability\n";
    for (std::size_t i = 0; i < report.communities.size(); ++i) {
        out += csv_escape(report.communities[i]) + "," + std::to_string(report.labels[i]) + "," +
               std::to_string(report.fold_assignment[i]) + "," +
               format_double(setting->oof_probability[i]) + "\n";
    }
    return out;
}

}  // namespace cep
