// Compares the OpenMP graph kernels against the serial reference on
// synthetic reply graphs of growing size.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <tuple>
#include <vector>

#include "cep/graph.hpp"
#include "cep/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

cep::ReplyGraph random_graph(int n, double avg_out_degree, std::uint64_t seed) {
    cep::Rng rng(seed);
    std::vector<std::tuple<int, int, long long>> edges;
    const long long m = static_cast<long long>(n * avg_out_degree);
    for (long long i = 0; i < m; ++i) {
        const int u = static_cast<int>(rng.uniform_u64(n));
        int v = static_cast<int>(rng.uniform_u64(n - 1));
        if (v >= u) ++v;
        edges.emplace_back(u, v, 1);
    }
    return cep::make_graph(n, edges);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> sizes = {200, 500, 1000, 2000};
    if (argc > 1) {
        sizes.clear();
        for (int i = 1; i < argc; ++i) sizes.push_back(std::stoi(argv[i]));
    }

    int threads = 1;
#pragma omp parallel
    {
#pragma omp single
        threads = omp_get_num_threads();
    }
    std::printf("betweenness + closeness, %d OpenMP threads\n", threads);
    std::printf("%8s %12s %12s %9s %10s\n", "nodes", "serial [s]", "omp [s]", "speedup",
                "max diff");

    for (int n : sizes) {
        const cep::ReplyGraph g = random_graph(n, 8.0, 1234 + n);

        auto t0 = Clock::now();
        const auto bc_serial = cep::serial::betweenness(g);
        const auto cl_serial = cep::serial::closeness(g);
        const double serial_s = seconds_since(t0);

        t0 = Clock::now();
        const auto profiles = cep::centrality_profiles(g);
        const double parallel_s = seconds_since(t0);

        const double diff = std::max(max_abs_diff(bc_serial, profiles.betweenness),
                                     max_abs_diff(cl_serial, profiles.closeness));

        std::printf("%8d %12.3f %12.3f %9.2f %10.1e\n", n, serial_s, parallel_s,
                    parallel_s > 0 ? serial_s / parallel_s : 0.0, diff);
    }
    return 0;
}
