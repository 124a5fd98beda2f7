#include <algorithm>
#include <queue>

#include "cep/graph.hpp"

// Straight-line single-threaded Brandes and closeness. These stay around
// as a reference for the OpenMP kernels; the exponential brute-force
// oracles used for correctness live in the test tree.

namespace cep::serial {

std::vector<double> betweenness(const ReplyGraph& g) {
    const int n = g.num_nodes();
    std::vector<double> bc(n, 0.0);

    std::vector<int> dist(n);
    std::vector<long long> sigma(n);
    std::vector<double> delta(n);
    std::vector<int> order;
    order.reserve(n);

    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0);
        std::fill(delta.begin(), delta.end(), 0.0);
        order.clear();

        dist[s] = 0;
        sigma[s] = 1;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            order.push_back(v);
            for (const auto& [w, weight] : g.out_edges[v]) {
                (void)weight;
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const int w = *it;
            for (const auto& [v, weight] : g.in_edges[w]) {
                (void)weight;
                if (dist[v] >= 0 && dist[w] == dist[v] + 1 && sigma[w] > 0)
                    delta[v] += static_cast<double>(sigma[v]) / static_cast<double>(sigma[w]) *
                                (1.0 + delta[w]);
            }
            if (w != s) bc[w] += delta[w];
        }
    }
    return bc;
}

std::vector<double> closeness(const ReplyGraph& g) {
    const int n = g.num_nodes();
    std::vector<double> out(n, 0.0);
    if (n <= 1) return out;

    std::vector<int> dist(n);
    for (int u = 0; u < n; ++u) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[u] = 0;
        std::queue<int> q;
        q.push(u);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (const auto& [w, weight] : g.in_edges[v]) {
                (void)weight;
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
            }
        }
        long long reach = 0;
        long long total = 0;
        for (int v = 0; v < n; ++v) {
            if (v != u && dist[v] >= 0) {
                ++reach;
                total += dist[v];
            }
        }
        if (reach > 0 && total > 0) {
            const double r = static_cast<double>(reach);
            out[u] = (r / static_cast<double>(total)) * (r / static_cast<double>(n - 1));
        }
    }
    return out;
}

}  // namespace cep::serial
