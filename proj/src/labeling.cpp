#include "cep/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"

namespace cep {

void LabelSet::assign(const std::string& community, int label, const std::string& provenance) {
    if (label != 0 && label != 1) throw ValidationError("label must be 0 or 1");
    auto it = assignments_.find(community);
    if (it != assignments_.end()) {
        if (it->second != label)
            throw ValidationError("community labeled both positive and negative: " + community);
        return;  // duplicates collapse, first provenance wins
    }
    assignments_[community] = label;
    provenance_[community] = provenance;
}

int LabelSet::label_of(const std::string& community) const {
    auto it = assignments_.find(community);
    if (it == assignments_.end()) throw ValidationError("community is unlabeled: " + community);
    return it->second;
}

const std::string& LabelSet::provenance_of(const std::string& community) const {
    auto it = provenance_.find(community);
    if (it == provenance_.end()) throw ValidationError("community is unlabeled: " + community);
    return it->second;
}

std::set<std::string> LabelSet::positives() const {
    std::set<std::string> out;
    for (const auto& [c, l] : assignments_) {
        if (l == 1) out.insert(c);
    }
    return out;
}

std::set<std::string> LabelSet::negatives() const {
    std::set<std::string> out;
    for (const auto& [c, l] : assignments_) {
        if (l == 0) out.insert(c);
    }
    return out;
}

void LabelSet::merge(const LabelSet& other) {
    for (const auto& [c, l] : other.assignments_) assign(c, l, other.provenance_.at(c));
}

LabelSet import_atlas(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open atlas file: " + path);
    LabelSet out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (first) {
            first = false;
            if (sv == "community") continue;  // optional header
        }
        out.assign(std::string(sv), 1, kProvenanceAtlas);
    }
    return out;
}

LabelSet load_labels_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open labels file: " + path);
    LabelSet out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto fields = split_csv_line(sv);
        if (first) {
            first = false;
            if (fields.size() >= 2 && trim(fields[0]) == "community") continue;
        }
        if (fields.size() < 2) throw FormatError(path + ": bad labels row: " + std::string(sv));
        const std::string community(trim(fields[0]));
        const std::string label(trim(fields[1]));
        const std::string provenance =
            fields.size() >= 3 ? std::string(trim(fields[2])) : std::string(kProvenanceAtlas);
        int value;
        if (label == "positive" || label == "1") value = 1;
        else if (label == "negative" || label == "0") value = 0;
        else throw FormatError(path + ": unknown label '" + label + "'");
        out.assign(community, value, provenance);
    }
    return out;
}

std::string labels_csv(const LabelSet& labels) {
    std::string out = "community,label,provenance\n";
    for (const auto& [c, l] : labels.assignments()) {
        out += csv_escape(c);
        out += l == 1 ? ",positive," : ",negative,";
        out += csv_escape(labels.provenance_of(c));
        out += '\n';
    }
    return out;
}

std::set<std::string> regex_candidates(const std::map<std::string, CommunityCorpus>& corpora,
                                       const std::vector<std::string>& patterns) {
    if (patterns.empty()) throw ConfigError("candidate matching requires at least one pattern");
    std::vector<std::regex> compiled;
    compiled.reserve(patterns.size());
    for (const auto& p : patterns) {
        try {
            compiled.emplace_back(p, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw ConfigError("invalid pattern '" + p + "': " + e.what());
        }
    }

    auto text_matches = [&](const std::string& raw) {
        const auto tokens = normalize_text(raw);
        std::string joined;
        for (const auto& t : tokens) {
            if (!joined.empty()) joined += ' ';
            joined += t;
        }
        for (const auto& re : compiled) {
            if (std::regex_search(joined, re)) return true;
        }
        return false;
    };

    std::set<std::string> out;
    for (const auto& [name, corpus] : corpora) {
        bool hit = false;
        for (const auto& s : corpus.submissions) {
            if (text_matches(s.title + " " + s.body)) {
                hit = true;
                break;
            }
        }
        if (!hit) {
            for (const auto& c : corpus.comments) {
                if (text_matches(c.body)) {
                    hit = true;
                    break;
                }
            }
        }
        if (hit) out.insert(name);
    }
    return out;
}

BootstrapResult bootstrap_labels(const LabelSet& seed, const std::set<std::string>& candidates,
                                 const FeatureMatrix& features, const BootstrapConfig& cfg) {
    if (seed.positives().empty() || seed.negatives().empty())
        throw ValidationError("bootstrap seed must contain both classes");
    if (cfg.max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
    if (cfg.confidence_threshold <= 0.0 || cfg.confidence_threshold >= 1.0)
        throw ValidationError("confidence threshold must lie in (0,1)");

    std::map<std::string, int> row_of;
    for (std::size_t i = 0; i < features.row_names.size(); ++i)
        row_of[features.row_names[i]] = static_cast<int>(i);

    auto row_index = [&](const std::string& community) {
        auto it = row_of.find(community);
        if (it == row_of.end())
            throw ValidationError("no feature vector for community: " + community);
        return it->second;
    };

    BootstrapResult result;
    result.labels = seed;
    std::set<std::string> unlabeled;
    for (const auto& c : candidates) {
        row_index(c);
        if (!result.labels.contains(c)) unlabeled.insert(c);
    }

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        std::vector<std::vector<double>> X;
        std::vector<int> y;
        for (const auto& [community, label] : result.labels.assignments()) {
            X.push_back(features.rows[row_index(community)]);
            y.push_back(label);
        }
        const TreeEnsemble model = gbt_train(X, y, cfg.classifier, features.column_names);

        std::vector<std::string> promoted;
        for (const auto& c : unlabeled) {
            const double p = model.predict_proba(features.rows[row_index(c)]);
            if (p >= cfg.confidence_threshold) promoted.push_back(c);
        }
        result.added_per_iteration.push_back(static_cast<int>(promoted.size()));
        if (promoted.empty()) break;
        const std::string provenance = "bootstrap-iter-" + std::to_string(iter);
        for (const auto& c : promoted) {
            result.labels.assign(c, 1, provenance);
            unlabeled.erase(c);
        }
    }
    return result;
}

double community_size(const CommunityCorpus& corpus, SizeMetric metric) {
    if (metric == SizeMetric::Submissions)
        return static_cast<double>(corpus.submissions.size());
    if (!corpus.meta) throw ValidationError("subscriber matching requires metadata: " + corpus.community);
    return static_cast<double>(corpus.meta->subscribers);
}

LabelSet match_negatives(const std::map<std::string, double>& positive_sizes,
                         const std::map<std::string, double>& pool_sizes) {
    for (const auto& [c, s] : positive_sizes) {
        (void)s;
        if (pool_sizes.count(c)) throw ValidationError("pool contains positive community: " + c);
    }
    if (pool_sizes.size() < positive_sizes.size())
        throw ValidationError("negative pool smaller than positive set (" +
                              std::to_string(pool_sizes.size()) + " < " +
                              std::to_string(positive_sizes.size()) + ")");

    // positives in descending size, name ascending on ties
    std::vector<std::pair<std::string, double>> positives(positive_sizes.begin(),
                                                          positive_sizes.end());
    std::sort(positives.begin(), positives.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::pair<std::string, double>> pool(pool_sizes.begin(), pool_sizes.end());
    std::vector<bool> used(pool.size(), false);

    LabelSet out;
    for (const auto& [positive, size] : positives) {
        (void)positive;
        int best = -1;
        double best_diff = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (used[i]) continue;
            const double diff = std::abs(pool[i].second - size);
            if (best < 0 || diff < best_diff ||
                (diff == best_diff && pool[i].first < pool[best].first)) {
                best = static_cast<int>(i);
                best_diff = diff;
            }
        }
        used[best] = true;
        out.assign(pool[best].first, 0, kProvenanceMatchedNegative);
    }
    return out;
}

}  // namespace cep
