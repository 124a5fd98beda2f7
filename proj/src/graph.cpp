#include "cep/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"
#include "cep/rng.hpp"

namespace cep {

namespace {

// Pushshift parent ids carry a thing-type prefix ("t3_abc" for submissions,
// "t1_abc" for comments); record ids do not.
std::string strip_thing_prefix(const std::string& id) {
    if (id.size() > 3 && id[0] == 't' && id[2] == '_' && id[1] >= '1' && id[1] <= '9')
        return id.substr(3);
    return id;
}

void finalize_adjacency(ReplyGraph& g, const std::map<std::pair<int, int>, long long>& weights) {
    const int n = g.num_nodes();
    g.out_edges.assign(n, {});
    g.in_edges.assign(n, {});
    for (const auto& [edge, w] : weights) {
        g.out_edges[edge.first].emplace_back(edge.second, w);
        g.in_edges[edge.second].emplace_back(edge.first, w);
    }
    g.edge_count = weights.size();
}

struct BrandesScratch {
    std::vector<int> dist;
    std::vector<long long> sigma;
    std::vector<double> delta;
    std::vector<int> order;  // BFS visit order
};

// Single-source dependency accumulation; adds this source's contribution
// into acc. Visit order and adjacency order are fixed, so the floating
// point result is a pure function of (graph, source).
void brandes_accumulate(const ReplyGraph& g, int s, BrandesScratch& sc, std::vector<double>& acc) {
    const int n = g.num_nodes();
    sc.dist.assign(n, -1);
    sc.sigma.assign(n, 0);
    sc.delta.assign(n, 0.0);
    sc.order.clear();

    sc.dist[s] = 0;
    sc.sigma[s] = 1;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        sc.order.push_back(v);
        for (const auto& [w, weight] : g.out_edges[v]) {
            (void)weight;
            if (sc.dist[w] < 0) {
                sc.dist[w] = sc.dist[v] + 1;
                q.push(w);
            }
            if (sc.dist[w] == sc.dist[v] + 1) sc.sigma[w] += sc.sigma[v];
        }
    }
    for (auto it = sc.order.rbegin(); it != sc.order.rend(); ++it) {
        const int w = *it;
        for (const auto& [v, weight] : g.in_edges[w]) {
            (void)weight;
            if (sc.dist[v] >= 0 && sc.dist[w] == sc.dist[v] + 1 && sc.sigma[w] > 0) {
                sc.delta[v] += static_cast<double>(sc.sigma[v]) / static_cast<double>(sc.sigma[w]) *
                               (1.0 + sc.delta[w]);
            }
        }
        if (w != s) acc[w] += sc.delta[w];
    }
}

// Distances on the reversed graph = lengths of incoming shortest paths.
void reverse_bfs(const ReplyGraph& g, int s, std::vector<int>& dist) {
    dist.assign(g.num_nodes(), -1);
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (const auto& [u, w] : g.in_edges[v]) {
            (void)w;
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                q.push(u);
            }
        }
    }
}

double wf_closeness_from_dist(const std::vector<int>& dist, int self, int n) {
    if (n <= 1) return 0.0;
    long long reach = 0;
    long long total = 0;
    for (int v = 0; v < n; ++v) {
        if (v == self || dist[v] < 0) continue;
        ++reach;
        total += dist[v];
    }
    if (reach == 0 || total == 0) return 0.0;
    const double r = static_cast<double>(reach);
    return (r / static_cast<double>(total)) * (r / static_cast<double>(n - 1));
}

std::vector<double> betweenness_parallel(const ReplyGraph& g, const std::vector<int>& sources,
                                         double scale) {
    const int n = g.num_nodes();
    std::vector<double> result(n, 0.0);
    const int block = 256;
    const int nblocks = (static_cast<int>(sources.size()) + block - 1) / block;

#pragma omp parallel
    {
        BrandesScratch sc;
        std::vector<double> local(n);
#pragma omp for ordered schedule(static)
        for (int b = 0; b < nblocks; ++b) {
            std::fill(local.begin(), local.end(), 0.0);
            const int lo = b * block;
            const int hi = std::min<int>(lo + block, static_cast<int>(sources.size()));
            for (int i = lo; i < hi; ++i) brandes_accumulate(g, sources[i], sc, local);
#pragma omp ordered
            {
                for (int v = 0; v < n; ++v) result[v] += local[v];
            }
        }
    }
    if (scale != 1.0) {
        for (double& v : result) v *= scale;
    }
    return result;
}

std::vector<double> closeness_parallel(const ReplyGraph& g) {
    const int n = g.num_nodes();
    std::vector<double> result(n, 0.0);
#pragma omp parallel
    {
        std::vector<int> dist;
#pragma omp for schedule(dynamic, 64)
        for (int v = 0; v < n; ++v) {
            reverse_bfs(g, v, dist);
            result[v] = wf_closeness_from_dist(dist, v, n);
        }
    }
    return result;
}

// Undirected projection as sorted neighbor lists.
std::vector<std::vector<int>> undirected_adjacency(const ReplyGraph& g) {
    const int n = g.num_nodes();
    std::vector<std::vector<int>> adj(n);
    for (int u = 0; u < n; ++u) {
        for (const auto& [v, w] : g.out_edges[u]) {
            (void)w;
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
    }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return adj;
}

std::vector<int> weak_component_ids(const std::vector<std::vector<int>>& adj, int n,
                                    std::vector<long long>& sizes) {
    std::vector<int> comp(n, -1);
    sizes.clear();
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        long long size = 0;
        std::vector<int> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            ++size;
            for (int w : adj[v]) {
                if (comp[w] < 0) {
                    comp[w] = id;
                    stack.push_back(w);
                }
            }
        }
        sizes.push_back(size);
    }
    return comp;
}

// Iterative Tarjan SCC.
std::vector<long long> strong_component_sizes(const ReplyGraph& g) {
    const int n = g.num_nodes();
    std::vector<int> index(n, -1), lowlink(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<long long> sizes;
    int next_index = 0;

    struct Frame {
        int v;
        std::size_t edge;
    };
    std::vector<Frame> call;

    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        call.push_back({root, 0});
        index[root] = lowlink[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            const int v = f.v;
            if (f.edge < g.out_edges[v].size()) {
                const int w = g.out_edges[v][f.edge].first;
                ++f.edge;
                if (index[w] < 0) {
                    index[w] = lowlink[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    lowlink[v] = std::min(lowlink[v], index[w]);
                }
            } else {
                call.pop_back();
                if (!call.empty())
                    lowlink[call.back().v] = std::min(lowlink[call.back().v], lowlink[v]);
                if (lowlink[v] == index[v]) {
                    long long size = 0;
                    while (true) {
                        const int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        ++size;
                        if (w == v) break;
                    }
                    sizes.push_back(size);
                }
            }
        }
    }
    return sizes;
}

long long count_triangles(const std::vector<std::vector<int>>& adj) {
    long long triangles = 0;
    const int n = static_cast<int>(adj.size());
    for (int u = 0; u < n; ++u) {
        for (int v : adj[u]) {
            if (v <= u) continue;
            // common neighbors w with w > v close a triangle exactly once
            auto iu = std::lower_bound(adj[u].begin(), adj[u].end(), v + 1);
            auto iv = std::lower_bound(adj[v].begin(), adj[v].end(), v + 1);
            while (iu != adj[u].end() && iv != adj[v].end()) {
                if (*iu < *iv) ++iu;
                else if (*iv < *iu) ++iv;
                else {
                    ++triangles;
                    ++iu;
                    ++iv;
                }
            }
        }
    }
    return triangles;
}

// Articulation-point check (iterative lowpoint DFS) on a connected
// undirected subgraph given by local adjacency.
bool has_articulation_point(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    if (n <= 2) return false;
    std::vector<int> disc(n, -1), low(n, 0), parent(n, -1);
    int timer = 0;
    struct Frame {
        int v;
        std::size_t edge;
    };
    std::vector<Frame> stack;
    int root_children = 0;
    stack.push_back({0, 0});
    disc[0] = low[0] = timer++;
    while (!stack.empty()) {
        Frame& f = stack.back();
        const int v = f.v;
        if (f.edge < adj[v].size()) {
            const int w = adj[v][f.edge];
            ++f.edge;
            if (disc[w] < 0) {
                parent[w] = v;
                if (v == 0) ++root_children;
                disc[w] = low[w] = timer++;
                stack.push_back({w, 0});
            } else if (w != parent[v]) {
                low[v] = std::min(low[v], disc[w]);
            }
        } else {
            stack.pop_back();
            if (!stack.empty()) {
                const int p = stack.back().v;
                low[p] = std::min(low[p], low[v]);
                if (p != 0 && low[v] >= disc[p]) return true;
            }
        }
    }
    return root_children > 1;
}

// Dinic max-flow used for local vertex connectivity.
class MaxFlow {
public:
    explicit MaxFlow(int n) : head_(n, -1) {}

    void add_edge(int u, int v, long long cap) {
        edges_.push_back({v, head_[u], cap});
        head_[u] = static_cast<int>(edges_.size()) - 1;
        edges_.push_back({u, head_[v], 0});
        head_[v] = static_cast<int>(edges_.size()) - 1;
    }

    long long run(int s, int t) {
        long long flow = 0;
        while (bfs(s, t)) {
            iter_ = head_;
            long long f;
            while ((f = dfs(s, t, std::numeric_limits<long long>::max())) > 0) flow += f;
        }
        return flow;
    }

private:
    struct Edge {
        int to;
        int next;
        long long cap;
    };

    bool bfs(int s, int t) {
        level_.assign(head_.size(), -1);
        std::queue<int> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int e = head_[v]; e >= 0; e = edges_[e].next) {
                if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
                    level_[edges_[e].to] = level_[v] + 1;
                    q.push(edges_[e].to);
                }
            }
        }
        return level_[t] >= 0;
    }

    long long dfs(int v, int t, long long f) {
        if (v == t) return f;
        for (int& e = iter_[v]; e >= 0; e = edges_[e].next) {
            Edge& ed = edges_[e];
            if (ed.cap > 0 && level_[ed.to] == level_[v] + 1) {
                const long long d = dfs(ed.to, t, std::min(f, ed.cap));
                if (d > 0) {
                    ed.cap -= d;
                    edges_[e ^ 1].cap += d;
                    return d;
                }
            }
        }
        return 0;
    }

    std::vector<int> head_;
    std::vector<int> iter_;
    std::vector<int> level_;
    std::vector<Edge> edges_;
};

// Local vertex connectivity between non-adjacent s and t: unit vertex
// capacities via node splitting, then max-flow.
long long local_vertex_connectivity(const std::vector<std::vector<int>>& adj, int s, int t) {
    const int n = static_cast<int>(adj.size());
    const long long inf = std::numeric_limits<int>::max();
    MaxFlow mf(2 * n);
    for (int v = 0; v < n; ++v) mf.add_edge(2 * v, 2 * v + 1, (v == s || v == t) ? inf : 1);
    for (int u = 0; u < n; ++u) {
        for (int v : adj[u]) {
            mf.add_edge(2 * u + 1, 2 * v, inf);
        }
    }
    return mf.run(2 * s + 1, 2 * t);
}

// Esfahanian's refinement: probe a minimum-degree vertex against its
// non-neighbors, then non-adjacent pairs among its neighbors.
long long vertex_connectivity(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    if (n <= 2) return 0;
    int v_min = 0;
    for (int v = 1; v < n; ++v) {
        if (adj[v].size() < adj[v_min].size()) v_min = v;
    }
    long long best = static_cast<long long>(adj[v_min].size());
    std::vector<bool> is_neighbor(n, false);
    for (int w : adj[v_min]) is_neighbor[w] = true;
    for (int w = 0; w < n; ++w) {
        if (w == v_min || is_neighbor[w]) continue;
        best = std::min(best, local_vertex_connectivity(adj, v_min, w));
        if (best == 0) return 0;
    }
    const auto& nb = adj[v_min];
    for (std::size_t i = 0; i < nb.size(); ++i) {
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
            const int x = nb[i];
            const int y = nb[j];
            if (!std::binary_search(adj[x].begin(), adj[x].end(), y))
                best = std::min(best, local_vertex_connectivity(adj, x, y));
        }
    }
    return best;
}

long long degeneracy(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> degree(n);
    int max_degree = 0;
    for (int v = 0; v < n; ++v) {
        degree[v] = static_cast<int>(adj[v].size());
        max_degree = std::max(max_degree, degree[v]);
    }
    std::vector<std::vector<int>> buckets(max_degree + 1);
    for (int v = 0; v < n; ++v) buckets[degree[v]].push_back(v);
    std::vector<bool> removed(n, false);
    long long core = 0;
    int processed = 0;
    int d = 0;
    while (processed < n) {
        while (d <= max_degree && buckets[d].empty()) ++d;
        if (d > max_degree) break;
        const int v = buckets[d].back();
        buckets[d].pop_back();
        if (removed[v] || degree[v] != d) continue;
        removed[v] = true;
        ++processed;
        core = std::max<long long>(core, d);
        for (int w : adj[v]) {
            if (!removed[w] && degree[w] > 0) {
                --degree[w];
                buckets[degree[w]].push_back(w);
            }
        }
        d = 0;
    }
    return core;
}

std::vector<int> largest_weak_component_nodes(const std::vector<std::vector<int>>& adj, int n) {
    std::vector<long long> sizes;
    std::vector<int> comp = weak_component_ids(adj, n, sizes);
    if (sizes.empty()) return {};
    int best = 0;
    for (int i = 1; i < static_cast<int>(sizes.size()); ++i) {
        if (sizes[i] > sizes[best]) best = i;
    }
    std::vector<int> nodes;
    nodes.reserve(static_cast<std::size_t>(sizes[best]));
    for (int v = 0; v < n; ++v) {
        if (comp[v] == best) nodes.push_back(v);
    }
    return nodes;
}

std::vector<std::vector<int>> induced_subgraph(const std::vector<std::vector<int>>& adj,
                                               const std::vector<int>& nodes) {
    std::unordered_map<int, int> local;
    local.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);
    std::vector<std::vector<int>> sub(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int w : adj[nodes[i]]) {
            auto it = local.find(w);
            if (it != local.end()) sub[i].push_back(it->second);
        }
        std::sort(sub[i].begin(), sub[i].end());
    }
    return sub;
}

struct Summary {
    double avg = 0, max = 0, min = 0, median = 0, std_dev = 0;
};

Summary summarize(std::vector<double> values) {
    Summary s;
    if (values.empty()) return s;
    const std::size_t n = values.size();
    double sum = 0;
    for (double v : values) sum += v;
    s.avg = sum / static_cast<double>(n);
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.median = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    double sq = 0;
    for (double v : values) sq += (v - s.avg) * (v - s.avg);
    s.std_dev = std::sqrt(sq / static_cast<double>(n));  // population std
    return s;
}

}  // namespace

ReplyGraph build_reply_graph(const CommunityCorpus& corpus) {
    ReplyGraph g;

    std::set<std::string> author_set;
    std::unordered_map<std::string, const std::string*> author_by_id;
    for (const auto& s : corpus.submissions) {
        if (!s.author.empty() && s.author != kDeletedAuthor) author_set.insert(s.author);
        author_by_id.emplace(s.id, &s.author);
    }
    for (const auto& c : corpus.comments) {
        if (!c.author.empty() && c.author != kDeletedAuthor) author_set.insert(c.author);
        author_by_id.emplace(c.id, &c.author);
    }
    g.authors.assign(author_set.begin(), author_set.end());
    std::unordered_map<std::string, int> node_of;
    node_of.reserve(g.authors.size());
    for (int i = 0; i < g.num_nodes(); ++i) node_of[g.authors[i]] = i;

    std::map<std::pair<int, int>, long long> weights;
    for (const auto& c : corpus.comments) {
        if (c.author.empty() || c.author == kDeletedAuthor) continue;
        auto pit = author_by_id.find(c.parent_id);
        if (pit == author_by_id.end()) pit = author_by_id.find(strip_thing_prefix(c.parent_id));
        if (pit == author_by_id.end()) {
            ++g.unresolved_replies;
            continue;
        }
        const std::string& parent_author = *pit->second;
        if (parent_author.empty() || parent_author == kDeletedAuthor) continue;
        if (parent_author == c.author) {
            ++g.dropped_self_replies;
            continue;
        }
        ++weights[{node_of.at(c.author), node_of.at(parent_author)}];
    }
    finalize_adjacency(g, weights);
    return g;
}

ReplyGraph make_graph(int num_nodes, const std::vector<std::tuple<int, int, long long>>& edges) {
    ReplyGraph g;
    g.authors.reserve(num_nodes);
    for (int i = 0; i < num_nodes; ++i) g.authors.push_back("n" + std::to_string(i));
    std::map<std::pair<int, int>, long long> weights;
    for (const auto& [u, v, w] : edges) {
        if (u == v) throw ValidationError("reply graph forbids self-loops");
        if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
            throw ValidationError("edge endpoint out of range");
        weights[{u, v}] += w;
    }
    finalize_adjacency(g, weights);
    return g;
}

NodeProfiles centrality_profiles(const ReplyGraph& g, const CentralityOptions& opts) {
    const int n = g.num_nodes();
    NodeProfiles p;
    p.degree_centrality.assign(n, 0.0);
    p.in_degree.assign(n, 0.0);

    std::vector<int> sources;
    double scale = 1.0;
    if (n <= opts.exact_betweenness_max_nodes || n <= opts.betweenness_pivots) {
        sources.resize(n);
        std::iota(sources.begin(), sources.end(), 0);
    } else {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        Rng rng(opts.pivot_seed);
        rng.shuffle(all);
        sources.assign(all.begin(), all.begin() + opts.betweenness_pivots);
        std::sort(sources.begin(), sources.end());
        scale = static_cast<double>(n) / static_cast<double>(opts.betweenness_pivots);
    }
    p.betweenness = betweenness_parallel(g, sources, scale);
    p.closeness = closeness_parallel(g);

    for (int v = 0; v < n; ++v) {
        if (n > 1) {
            const double deg =
                static_cast<double>(g.out_edges[v].size() + g.in_edges[v].size());
            p.degree_centrality[v] = deg / static_cast<double>(n - 1);
        }
        if (opts.weighted_in_degree) {
            long long w_sum = 0;
            for (const auto& [u, w] : g.in_edges[v]) {
                (void)u;
                w_sum += w;
            }
            p.in_degree[v] = static_cast<double>(w_sum);
        } else {
            p.in_degree[v] = static_cast<double>(g.in_edges[v].size());
        }
    }
    return p;
}

ComponentStats component_stats(const ReplyGraph& g) {
    ComponentStats st;
    const int n = g.num_nodes();
    if (n == 0) return st;

    const auto adj = undirected_adjacency(g);
    std::vector<long long> weak_sizes;
    weak_component_ids(adj, n, weak_sizes);
    st.num_weak = static_cast<long long>(weak_sizes.size());
    for (long long s : weak_sizes) {
        if (s > 2) ++st.num_weak_gt2;
        st.max_weak = std::max(st.max_weak, s);
    }

    const auto strong_sizes = strong_component_sizes(g);
    st.num_strong = static_cast<long long>(strong_sizes.size());
    for (long long s : strong_sizes) {
        if (s > 2) ++st.num_strong_gt2;
        st.max_strong = std::max(st.max_strong, s);
    }
    return st;
}

CohesionStats cohesion_stats(const ReplyGraph& g, const CohesionOptions& opts) {
    CohesionStats st;
    const int n = g.num_nodes();
    if (n == 0) return st;

    const auto adj = undirected_adjacency(g);
    st.num_triangles = count_triangles(adj);
    if (n > 1)
        st.density = static_cast<double>(g.edge_count) /
                     (static_cast<double>(n) * static_cast<double>(n - 1));

    const auto comp_nodes = largest_weak_component_nodes(adj, n);
    const auto sub = induced_subgraph(adj, comp_nodes);
    const int cn = static_cast<int>(sub.size());

    if (cn == 1) {
        st.is_biconnected = 0;
    } else if (cn == 2) {
        st.is_biconnected = 1;
    } else {
        st.is_biconnected = has_articulation_point(sub) ? 0 : 1;
    }

    long long undirected_edges = 0;
    for (const auto& nb : sub) undirected_edges += static_cast<long long>(nb.size());
    undirected_edges /= 2;
    const bool complete =
        cn >= 1 && undirected_edges == static_cast<long long>(cn) * (cn - 1) / 2;
    if (cn <= 2 || complete) {
        st.num_nodes_to_cut = 0;
    } else if (cn > opts.exact_cut_max_nodes) {
        st.num_nodes_to_cut = degeneracy(sub);
        st.cut_capped = true;
    } else {
        st.num_nodes_to_cut = vertex_connectivity(sub);
    }
    return st;
}

const std::array<const char*, kNetworkFeatureCount> kNetworkFeatureNames = {
    "num_nodes",
    "num_triangles",
    "num_edges",
    "is_biconnected",
    "num_nodes_to_cut",
    "density",
    "num_connected_components",
    "num_connected_components_gt2",
    "max_connected_component",
    "num_strongly_connected_components",
    "num_strongly_connected_components_gt2",
    "max_strongly_connected_component",
    "betweenness_avg",
    "betweenness_max",
    "betweenness_min",
    "betweenness_median",
    "betweenness_std",
    "centrality_avg",
    "centrality_max",
    "centrality_min",
    "centrality_median",
    "centrality_std",
    "closeness_avg",
    "closeness_max",
    "closeness_min",
    "closeness_median",
    "closeness_std",
    "in_degree_avg",
    "in_degree_max",
    "in_degree_min",
    "in_degree_median",
    "in_degree_std",
};

std::array<double, kNetworkFeatureCount> network_feature_vector(const ReplyGraph& g) {
    std::array<double, kNetworkFeatureCount> out{};
    const int n = g.num_nodes();
    if (n == 0) return out;

    const auto profiles = centrality_profiles(g);
    const auto comps = component_stats(g);
    const auto cohesion = cohesion_stats(g);

    out[0] = static_cast<double>(n);
    out[1] = static_cast<double>(cohesion.num_triangles);
    out[2] = static_cast<double>(g.edge_count);
    out[3] = static_cast<double>(cohesion.is_biconnected);
    out[4] = static_cast<double>(cohesion.num_nodes_to_cut);
    out[5] = cohesion.density;
    out[6] = static_cast<double>(comps.num_weak);
    out[7] = static_cast<double>(comps.num_weak_gt2);
    out[8] = static_cast<double>(comps.max_weak);
    out[9] = static_cast<double>(comps.num_strong);
    out[10] = static_cast<double>(comps.num_strong_gt2);
    out[11] = static_cast<double>(comps.max_strong);

    const Summary b = summarize(profiles.betweenness);
    const Summary c = summarize(profiles.degree_centrality);
    const Summary cl = summarize(profiles.closeness);
    const Summary ind = summarize(profiles.in_degree);
    int i = 12;
    for (const Summary* s : {&b, &c, &cl, &ind}) {
        out[i++] = s->avg;
        out[i++] = s->max;
        out[i++] = s->min;
        out[i++] = s->median;
        out[i++] = s->std_dev;
    }
    return out;
}

std::string edge_list_csv(const ReplyGraph& g) {
    std::string out = "u,v,weight\n";
    for (int u = 0; u < g.num_nodes(); ++u) {
        for (const auto& [v, w] : g.out_edges[u]) {
            out += csv_escape(g.authors[u]);
            out += ',';
            out += csv_escape(g.authors[v]);
            out += ',';
            out += std::to_string(w);
            out += '\n';
        }
    }
    return out;
}

}  // namespace cep
