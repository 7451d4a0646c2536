#pragma once

#include <cdst/generator.hpp>
#include <cdst/graph.hpp>
#include <cdst/tree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cdst::test {

/// Path graph 0 - 1 - ... - (n-1) along the x axis, every edge (c, d).
inline RoutingGraph path_graph(int n, double c, double d) {
    std::vector<GridPoint> pts;
    std::vector<GraphEdge> edges;
    for (int i = 0; i < n; ++i) pts.push_back({i, 0, 0});
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, c, d, 0});
    return RoutingGraph(std::move(pts), std::move(edges));
}

/// Star: center 0 at (0,0), leaves 1..k, every edge (c, d).
inline RoutingGraph star_graph(int k, double c, double d) {
    std::vector<GridPoint> pts{{0, 0, 0}};
    std::vector<GraphEdge> edges;
    for (int i = 1; i <= k; ++i) {
        pts.push_back({i, i % 2, 0});
        edges.push_back({0, i, c, d, 0});
    }
    return RoutingGraph(std::move(pts), std::move(edges));
}

/// Bellman-Ford over all edges; independent of the library's Dijkstra.
inline std::vector<double> bellman_ford(const RoutingGraph& g, const std::vector<std::pair<VertexId, double>>& seeds,
                                        const std::function<double(EdgeId)>& len) {
    std::vector<double> dist(g.vertex_count(), kInfinity);
    for (auto [v, val] : seeds) dist[static_cast<std::size_t>(v)] = std::min(dist[static_cast<std::size_t>(v)], val);
    for (std::size_t round = 0; round < g.vertex_count(); ++round) {
        bool changed = false;
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
            const GraphEdge& ge = g.edge(static_cast<EdgeId>(e));
            const double l = len(static_cast<EdgeId>(e));
            const auto u = static_cast<std::size_t>(ge.u);
            const auto v = static_cast<std::size_t>(ge.v);
            if (dist[u] + l < dist[v]) {
                dist[v] = dist[u] + l;
                changed = true;
            }
            if (dist[v] + l < dist[u]) {
                dist[u] = dist[v] + l;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return dist;
}

inline std::vector<double> bellman_ford(const RoutingGraph& g, VertexId s, const std::function<double(EdgeId)>& len) {
    return bellman_ford(g, {{s, 0.0}}, len);
}

/// Edge ids of one shortest walk from `a` to `b` by Bellman-Ford distances.
inline std::vector<EdgeId> shortest_walk(const RoutingGraph& g, VertexId a, VertexId b,
                                         const std::function<double(EdgeId)>& len) {
    const auto dist = bellman_ford(g, b, len);
    std::vector<EdgeId> walk;
    VertexId cur = a;
    while (cur != b) {
        EdgeId pick = kNoEdge;
        for (EdgeId e : g.incident(cur)) {
            const VertexId w = g.edge(e).other(cur);
            if (std::abs(dist[static_cast<std::size_t>(w)] + len(e) - dist[static_cast<std::size_t>(cur)]) <=
                1e-12 * std::max(1.0, dist[static_cast<std::size_t>(cur)]) && dist[static_cast<std::size_t>(w)] < dist[static_cast<std::size_t>(cur)]) {
                pick = e;
                break;
            }
        }
        if (pick == kNoEdge) throw std::logic_error("no descending edge");
        walk.push_back(pick);
        cur = g.edge(pick).other(cur);
    }
    return walk;
}

/// Generated grid with hotspot congestion, two wire types and lognormal
/// weights; the standard randomized test instance.
inline GridInstance grid_instance(std::uint64_t seed, int sinks, int width = 6, int layers = 2, double d_bif = 0.0,
                                  double eta = 0.5) {
    GridSpec s;
    s.seed = seed;
    s.width = width;
    s.height = width;
    s.layers = layers;
    s.wire_types = 2;
    s.sink_count = sinks;
    s.congestion = CongestionProfile::hotspots;
    s.weights = WeightProfile::lognormal;
    s.d_bif = d_bif;
    s.eta = eta;
    return generate_grid_instance(s);
}

/// 2 * ceil(log_{4/3} t), the approximation factor checked against OPT;
/// a single sink is solved exactly.
inline double log_bound(std::size_t t) {
    if (t <= 1) return 1.0;
    return 2.0 * std::ceil(std::log(static_cast<double>(t)) / std::log(4.0 / 3.0));
}

/// Optimal cost of root -> s -> {sink 0, sink 1} over every position of s,
/// from three Bellman-Ford sweeps.
inline double brute_force_one_bifurcation(const RoutingGraph& g, const NetInstance& net) {
    const double wa = net.sinks[0].weight;
    const double wb = net.sinks[1].weight;
    const auto lam = optimal_lambda(wa, wb, net.eta);
    const auto from_root = bellman_ford(g, net.root, [&g, wa, wb](EdgeId e) { return g.edge(e).cost + (wa + wb) * g.edge(e).delay; });
    const auto from_a = bellman_ford(g, net.sinks[0].position, [&g, wa](EdgeId e) { return g.edge(e).cost + wa * g.edge(e).delay; });
    const auto from_b = bellman_ford(g, net.sinks[1].position, [&g, wb](EdgeId e) { return g.edge(e).cost + wb * g.edge(e).delay; });
    double best = kInfinity;
    for (std::size_t x = 0; x < g.vertex_count(); ++x) {
        best = std::min(best, from_root[x] + from_a[x] + from_b[x] + net.d_bif * (lam.first * wa + lam.second * wb));
    }
    return best;
}

inline std::function<double(EdgeId)> cd_length(const RoutingGraph& g, double w) {
    return [&g, w](EdgeId e) { return g.edge(e).cost + w * g.edge(e).delay; };
}

} // namespace cdst::test
