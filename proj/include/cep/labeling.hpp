#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cep/corpus.hpp"
#include "cep/features.hpp"
#include "cep/gbt.hpp"

namespace cep {

inline constexpr const char* kProvenanceAtlas = "atlas";
inline constexpr const char* kProvenanceManualSeed = "manual-seed";
inline constexpr const char* kProvenanceMatchedNegative = "matched-negative";
// bootstrap provenance is "bootstrap-iter-<k>"

class LabelSet {
public:
    // Throws ValidationError when a community would carry both labels.
    void assign(const std::string& community, int label, const std::string& provenance);

    bool contains(const std::string& community) const { return assignments_.count(community) > 0; }
    int label_of(const std::string& community) const;
    const std::string& provenance_of(const std::string& community) const;

    std::set<std::string> positives() const;
    std::set<std::string> negatives() const;
    std::size_t size() const { return assignments_.size(); }

    const std::map<std::string, int>& assignments() const { return assignments_; }

    void merge(const LabelSet& other);

private:
    std::map<std::string, int> assignments_;  // 1 positive / 0 negative
    std::map<std::string, std::string> provenance_;
};

// CSV of community names, one per line; a leading "community" header line
// is tolerated. Duplicates collapse.
LabelSet import_atlas(const std::string& path);

// community,label,provenance rows (header required); label in
// {positive,negative,1,0}.
LabelSet load_labels_csv(const std::string& path);
std::string labels_csv(const LabelSet& labels);

// A community is a candidate iff any pattern matches the normalized text
// of any of its submissions or comments in the campaign-window corpora.
std::set<std::string> regex_candidates(const std::map<std::string, CommunityCorpus>& corpora,
                                       const std::vector<std::string>& patterns);

struct BootstrapConfig {
    std::vector<std::string> patterns;
    double confidence_threshold = 0.95;
    int max_iterations = 3;
    GbtParams classifier;  // retrained from scratch each iteration
};

struct BootstrapResult {
    LabelSet labels;                       // seed plus promoted candidates
    std::vector<int> added_per_iteration;  // one entry per executed iteration
};

// Self-training expansion: each iteration fits the GBT on the current
// label set, scores the still-unlabeled candidates and promotes those at
// or above the confidence threshold. Stops early once an iteration adds
// nothing.
BootstrapResult bootstrap_labels(const LabelSet& seed, const std::set<std::string>& candidates,
                                 const FeatureMatrix& features, const BootstrapConfig& cfg);

enum class SizeMetric { Submissions, Subscribers };

double community_size(const CommunityCorpus& corpus, SizeMetric metric);

// Greedy nearest-size matching without replacement: positives in
// descending size order each claim the unused pool community with the
// minimal absolute size difference (ties to the lexicographically smaller
// name). Returns the matched-negative additions only.
LabelSet match_negatives(const std::map<std::string, double>& positive_sizes,
                         const std::map<std::string, double>& pool_sizes);

}  // namespace cep
