#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cep/corpus.hpp"

namespace cep {

// Directed author interaction graph: an edge u -> v carries the number of
// direct replies by u to content authored by v. Nodes cover every active
// non-deleted author, including isolated ones. Node ids index the sorted
// author list, so identical corpora always produce identical graphs.
struct ReplyGraph {
    std::vector<std::string> authors;
    std::vector<std::vector<std::pair<int, long long>>> out_edges;  // sorted by target
    std::vector<std::vector<std::pair<int, long long>>> in_edges;   // sorted by source
    std::size_t edge_count = 0;          // distinct ordered pairs
    std::size_t unresolved_replies = 0;  // parent_id not found in the corpus
    std::size_t dropped_self_replies = 0;

    int num_nodes() const { return static_cast<int>(authors.size()); }
};

ReplyGraph build_reply_graph(const CommunityCorpus& corpus);

// Assembles a graph directly from edge triples; test and synth helper.
ReplyGraph make_graph(int num_nodes, const std::vector<std::tuple<int, int, long long>>& edges);

struct NodeProfiles {
    std::vector<double> betweenness;        // Brandes, directed, unnormalized
    std::vector<double> degree_centrality;  // (in+out distinct edges) / (n-1)
    std::vector<double> closeness;          // incoming paths, Wasserman-Faust scaled
    std::vector<double> in_degree;          // weighted unless configured otherwise
};

struct CentralityOptions {
    bool weighted_in_degree = true;
    // Graphs above this size switch to pivot-sampled betweenness.
    int exact_betweenness_max_nodes = 50000;
    int betweenness_pivots = 1024;
    std::uint64_t pivot_seed = 9271;
};

NodeProfiles centrality_profiles(const ReplyGraph& g, const CentralityOptions& opts = {});

struct ComponentStats {
    long long num_weak = 0;
    long long num_weak_gt2 = 0;  // components with more than two nodes
    long long max_weak = 0;
    long long num_strong = 0;
    long long num_strong_gt2 = 0;
    long long max_strong = 0;
};

ComponentStats component_stats(const ReplyGraph& g);

struct CohesionStats {
    long long num_triangles = 0;  // undirected projection, each triple once
    double density = 0.0;         // edges / (n * (n-1)); 0 when n <= 1
    int is_biconnected = 0;       // largest weak component, undirected
    long long num_nodes_to_cut = 0;  // minimum vertex cut of that component
    bool cut_capped = false;      // degeneracy bound substituted on huge components
};

struct CohesionOptions {
    // Components above this size report the degeneracy bound instead of an
    // exact max-flow vertex cut.
    int exact_cut_max_nodes = 20000;
};

CohesionStats cohesion_stats(const ReplyGraph& g, const CohesionOptions& opts = {});

inline constexpr int kNetworkFeatureCount = 32;
extern const std::array<const char*, kNetworkFeatureCount> kNetworkFeatureNames;

// The full 32-value structural block in fixed order; all zeros for the
// empty graph. Aggregates use population standard deviation.
std::array<double, kNetworkFeatureCount> network_feature_vector(const ReplyGraph& g);

// Optional per-community edge-list export: "u,v,weight" rows, author names.
std::string edge_list_csv(const ReplyGraph& g);

// Simple straight-line implementations kept as a reference for the
// OpenMP kernels; exercised by tests and the benchmark tool.
namespace serial {
std::vector<double> betweenness(const ReplyGraph& g);
std::vector<double> closeness(const ReplyGraph& g);
}  // namespace serial

}  // namespace cep
