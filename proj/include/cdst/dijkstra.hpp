#pragma once

#include <cdst/graph.hpp>

#include <algorithm>
#include <functional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace cdst {

struct ShortestPaths {
    std::vector<double> dist;
    std::vector<EdgeId> parent_edge;  // kNoEdge at seeds and unreached vertices

    bool reached(VertexId v) const { return dist[static_cast<std::size_t>(v)] < kInfinity; }
};

struct Seed {
    VertexId vertex;
    double value;
};

/// Multi-seeded Dijkstra with an edge length functor `len(EdgeId) -> double`.
/// Extraction order is (distance, vertex id); relaxation uses strict
/// improvement, so results are reproducible bit for bit.
template <class Length>
ShortestPaths dijkstra(const RoutingGraph& g, std::span<const Seed> seeds, Length&& len) {
    const std::size_t n = g.vertex_count();
    ShortestPaths sp{std::vector<double>(n, kInfinity), std::vector<EdgeId>(n, kNoEdge)};
    using Entry = std::pair<double, VertexId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (const Seed& s : seeds) {
        auto& d = sp.dist[static_cast<std::size_t>(s.vertex)];
        if (s.value < d) {
            d = s.value;
            heap.emplace(s.value, s.vertex);
        }
    }
    std::vector<char> done(n, 0);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (done[static_cast<std::size_t>(v)] || d != sp.dist[static_cast<std::size_t>(v)]) continue;
        done[static_cast<std::size_t>(v)] = 1;
        for (EdgeId e : g.incident(v)) {
            const VertexId w = g.edge(e).other(v);
            if (done[static_cast<std::size_t>(w)]) continue;
            const double nd = d + len(e);
            if (nd < sp.dist[static_cast<std::size_t>(w)]) {
                sp.dist[static_cast<std::size_t>(w)] = nd;
                sp.parent_edge[static_cast<std::size_t>(w)] = e;
                heap.emplace(nd, w);
            }
        }
    }
    return sp;
}

template <class Length>
ShortestPaths dijkstra(const RoutingGraph& g, VertexId source, Length&& len) {
    const Seed s{source, 0.0};
    return dijkstra(g, std::span<const Seed>(&s, 1), std::forward<Length>(len));
}

/// Edges from `v` back to the seed that labeled it, in walk order starting
/// at `v`.
inline std::vector<EdgeId> path_to_seed(const RoutingGraph& g, const ShortestPaths& sp, VertexId v) {
    std::vector<EdgeId> walk;
    VertexId cur = v;
    while (sp.parent_edge[static_cast<std::size_t>(cur)] != kNoEdge) {
        const EdgeId e = sp.parent_edge[static_cast<std::size_t>(cur)];
        walk.push_back(e);
        cur = g.edge(e).other(cur);
    }
    return walk;
}

/// Walk from the seed to `v` (reverse of path_to_seed).
inline std::vector<EdgeId> path_from_seed(const RoutingGraph& g, const ShortestPaths& sp, VertexId v) {
    auto walk = path_to_seed(g, sp, v);
    std::reverse(walk.begin(), walk.end());
    return walk;
}

/// Length functor c(e) + w * d(e).
inline auto cost_distance_length(const RoutingGraph& g, double w) {
    return [&g, w](EdgeId e) {
        const GraphEdge& ge = g.edge(e);
        return ge.cost + w * ge.delay;
    };
}

} // namespace cdst
