#pragma once

#include <cdst/cd_solver.hpp>
#include <cdst/dijkstra.hpp>
#include <cdst/embedding.hpp>
#include <cdst/topology.hpp>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <tuple>
#include <vector>

namespace cdst {

/// All bifurcation-compatible shapes with the root and `sink_count` sinks as
/// labeled leaves, rooted at the root leaf. Node 0 is the root, node i + 1 is
/// sink i, Steiner nodes follow; positions are left at (0, 0). Built by
/// subdividing each existing edge with the next sink, so every shape appears
/// exactly once and the order is deterministic.
inline std::vector<Topology> enumerate_topologies(int sink_count) {
    if (sink_count < 1 || sink_count > 5) throw ParameterError("sink count must be in [1, 5]");
    Topology base;
    base.nodes.push_back({0, 0, TopoKind::root, -1});
    for (int i = 0; i < sink_count; ++i) base.nodes.push_back({0, 0, TopoKind::sink, i});
    base.edges.emplace_back(0, 1);
    base.root = 0;

    std::vector<Topology> out;
    std::function<void(Topology&, int)> grow = [&](Topology& t, int next) {
        if (next == sink_count) {
            out.push_back(t);
            return;
        }
        const std::size_t edge_count = t.edges.size();
        for (std::size_t e = 0; e < edge_count; ++e) {
            Topology x = t;
            const auto [p, c] = x.edges[e];
            const int s = static_cast<int>(x.nodes.size());
            x.nodes.push_back({0, 0, TopoKind::steiner, -1});
            x.edges[e] = {p, s};
            x.edges.emplace_back(s, c);
            x.edges.emplace_back(s, next + 1);
            grow(x, next + 1);
        }
    };
    grow(base, 1);
    return out;
}

struct OracleResult {
    EmbeddedTree tree;
    double value = 0.0;
    std::size_t topology_index = 0;
    std::size_t topology_count = 0;
};

inline constexpr std::size_t kOracleMaxSinks = 4;

/// Minimum over every enumerated topology of its optimal embedding. Ties go
/// to the lower enumeration index.
inline OracleResult exact_opt(const RoutingGraph& g, const NetInstance& net) {
    validate_instance(g, net);
    if (net.sinks.size() > kOracleMaxSinks) {
        throw SizeError("exact oracle supports at most " + std::to_string(kOracleMaxSinks) + " sinks, got " +
                        std::to_string(net.sinks.size()));
    }
    auto shapes = enumerate_topologies(static_cast<int>(net.sinks.size()));
    const Topology terms = terminal_nodes(g, net);
    OracleResult best;
    best.value = kInfinity;
    best.topology_count = shapes.size();
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        Topology& t = shapes[i];
        for (std::size_t v = 0; v < terms.nodes.size(); ++v) t.nodes[v] = terms.nodes[v];
        double value = kInfinity;
        EmbeddedTree tree = embed_topology_optimal(g, net, t, &value);
        if (value < best.value) {
            best.value = value;
            best.tree = std::move(tree);
            best.topology_index = i;
        }
    }
    return best;
}

/// One ordered merge candidate: `source` searches toward `target`.
struct PairCandidate {
    TerminalId source = -1;
    TerminalId target = -1;
    bool target_is_root = false;
    double value = 0.0;
    double distance = 0.0;
    double penalty = 0.0;
    VertexId target_vertex = kNoVertex;
};

struct PairwiseReference {
    std::vector<TerminalId> ids;          // row/column order, as in the active set
    std::vector<std::vector<double>> L;   // symmetric, +inf on the diagonal
    std::vector<PairCandidate> ordered;   // ascending by (value, source, target vertex, target)
};

/// Pairwise merge values by one Dijkstra per ordered pair. A sink-like
/// terminal x may search toward y when y is the root or w(x) <= w(y); the
/// search length is c + w(x) d and the value adds b(x, y).
inline PairwiseReference pairwise_L_reference(const RoutingGraph& g, const ActiveSet& active, double d_bif, double eta,
                                              bool root_bonus = false) {
    PairwiseReference ref;
    const std::size_t n = active.terminals.size();
    for (const auto& t : active.terminals) ref.ids.push_back(t.id);
    ref.L.assign(n, std::vector<double>(n, kInfinity));
    for (std::size_t i = 0; i < n; ++i) {
        const ActiveTerminal& x = active.terminals[i];
        if (x.origin == TerminalOrigin::root) continue;
        const auto sp = dijkstra(g, x.position, cost_distance_length(g, x.weight));
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const ActiveTerminal& y = active.terminals[j];
            const bool to_root = y.origin == TerminalOrigin::root;
            if (!to_root && !(x.weight <= y.weight)) continue;
            PairCandidate c;
            c.source = x.id;
            c.target = y.id;
            c.target_is_root = to_root;
            c.distance = sp.dist[static_cast<std::size_t>(y.position)];
            c.penalty = merge_penalty(x, y, active, d_bif, eta, root_bonus);
            c.value = c.distance + c.penalty;
            c.target_vertex = y.position;
            ref.L[i][j] = std::min(ref.L[i][j], c.value);
            ref.L[j][i] = std::min(ref.L[j][i], c.value);
            ref.ordered.push_back(c);
        }
    }
    std::sort(ref.ordered.begin(), ref.ordered.end(), [](const PairCandidate& a, const PairCandidate& b) {
        return std::tie(a.value, a.source, a.target_vertex, a.target) < std::tie(b.value, b.source, b.target_vertex, b.target);
    });
    return ref;
}

/// Whether merging `source` into `target` with value `value` is a minimum
/// pair of `ref`. Candidates within `rel` of the minimum are ties up to
/// rounding; among them, the global tie-break decides only against
/// candidates whose reference value is not larger than the chosen one's.
inline bool is_reference_choice(const PairwiseReference& ref, TerminalId source, TerminalId target, double value, double rel) {
    if (ref.ordered.empty()) return false;
    const double best = ref.ordered.front().value;
    const PairCandidate* chosen = nullptr;
    for (const auto& c : ref.ordered) {
        if (!relative_close(c.value, best, rel)) break;
        if (c.source == source && c.target == target) chosen = &c;
    }
    if (!chosen || !relative_close(value, chosen->value, rel)) return false;
    for (const auto& c : ref.ordered) {
        if (c.value > chosen->value) break;
        if (std::tie(c.source, c.target_vertex, c.target) < std::tie(chosen->source, chosen->target_vertex, chosen->target)) return false;
    }
    return true;
}

/// Minimum spanning tree cost of the metric closure over the root and the
/// sinks under edge cost c alone (Prim, ties by index).
inline double metric_closure_mst(const RoutingGraph& g, const NetInstance& net) {
    validate_instance(g, net);
    std::vector<VertexId> terms{net.root};
    for (const auto& s : net.sinks) terms.push_back(s.position);
    const std::size_t n = terms.size();
    std::vector<std::vector<double>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto sp = dijkstra(g, terms[i], [&g](EdgeId e) { return g.edge(e).cost; });
        for (VertexId t : terms) dist[i].push_back(sp.dist[static_cast<std::size_t>(t)]);
    }
    std::vector<double> best(n, kInfinity);
    std::vector<char> in(n, 0);
    best[0] = 0.0;
    double total = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t pick = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!in[v] && (pick == n || best[v] < best[pick])) pick = v;
        if (!(best[pick] < kInfinity)) throw ExhaustionError("terminals are not connected");
        in[pick] = 1;
        total += best[pick];
        for (std::size_t v = 0; v < n; ++v)
            if (!in[v]) best[v] = std::min(best[v], dist[pick][v]);
    }
    return total;
}

} // namespace cdst
