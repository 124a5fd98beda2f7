#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cep/corpus.hpp"
#include "cep/graph.hpp"

namespace cep {

inline constexpr int kMetaFeatureCount = 25;
inline constexpr int kLinguisticFeatureCount = 300;
extern const std::array<const char*, kMetaFeatureCount> kMetaFeatureNames;

struct MetaFeatures {
    std::array<double, kMetaFeatureCount> values{};
    // zero-denominator features are reported as 0 and flagged here
    std::array<bool, kMetaFeatureCount> degenerate{};
};

// The 25 meta values in fixed order. Requires corpus.meta (communities
// without metadata are dropped upstream rather than imputed). `cutoff`
// anchors the age feature, normally the feature window's end.
MetaFeatures compute_meta_features(const CommunityCorpus& corpus, std::int64_t cutoff);

// Bag of normalized tokens over a community's submission texts (title and
// selftext), capped to the most recent `cap` submissions. Comments never
// contribute to the linguistic block.
struct TokenBag {
    std::map<std::string, long long> counts;
    long long total = 0;
};

TokenBag submission_token_bag(const CommunityCorpus& corpus, std::size_t cap = 10000);

struct Vocabulary {
    std::vector<std::string> tokens;  // descending corpus frequency, ties lexicographic
    std::vector<long long> doc_frequency;
    long long num_documents = 0;

    int find(const std::string& token) const;
};

// Top-k tokens by total frequency over the training-fold bags only.
Vocabulary build_vocabulary(const std::vector<const TokenBag*>& training_bags,
                            int k = kLinguisticFeatureCount);

// tf = raw count / total tokens in the bag; idf = ln(N / df), unsmoothed.
// Always returns exactly 300 values, zero-padded past the vocabulary.
std::vector<double> tfidf_vector(const TokenBag& bag, const Vocabulary& vocab);

struct CommunityFeatures {
    std::string community;
    TokenBag text;
    MetaFeatures meta;
    std::array<double, kNetworkFeatureCount> network{};
};

struct BlockSelection {
    bool L = false;
    bool M = false;
    bool N = false;

    int column_count() const {
        return (L ? kLinguisticFeatureCount : 0) + (M ? kMetaFeatureCount : 0) +
               (N ? kNetworkFeatureCount : 0);
    }
    std::string name() const;  // "L+M+N" style
};

BlockSelection parse_blocks(const std::string& spec);  // "L", "M+N", "LMN", ...

struct FeatureMatrix {
    std::vector<std::string> row_names;  // sorted community names
    std::vector<int> labels;             // 1 positive / 0 negative, aligned with rows
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> rows;
};

// Rows follow sorted community order; columns concatenate the selected
// blocks in L,M,N order. Throws ValidationError naming the first
// community that lacks a requested block.
FeatureMatrix assemble_matrix(const std::map<std::string, CommunityFeatures>& features,
                              const std::map<std::string, int>& labels, BlockSelection blocks,
                              const Vocabulary* vocab);

std::string feature_matrix_csv(const FeatureMatrix& m);

}  // namespace cep
