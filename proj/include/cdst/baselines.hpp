#pragma once

#include <cdst/future_cost.hpp>
#include <cdst/topology.hpp>

#include <algorithm>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

namespace cdst {

namespace detail {

/// Mutable rooted tree over topology nodes; children kept in insertion order.
struct RawTree {
    std::vector<TopoNode> nodes;
    std::vector<int> parent;
    std::vector<std::vector<int>> children;
    int root = 0;

    int add(TopoNode n) {
        nodes.push_back(n);
        parent.push_back(-1);
        children.emplace_back();
        return static_cast<int>(nodes.size()) - 1;
    }

    void attach(int p, int c) {
        parent[static_cast<std::size_t>(c)] = p;
        children[static_cast<std::size_t>(p)].push_back(c);
    }

    void detach(int c) {
        const int p = parent[static_cast<std::size_t>(c)];
        std::erase(children[static_cast<std::size_t>(p)], c);
        parent[static_cast<std::size_t>(c)] = -1;
    }

    std::vector<int> preorder() const {
        std::vector<int> order;
        std::vector<int> stack{root};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            order.push_back(v);
            const auto& ch = children[static_cast<std::size_t>(v)];
            for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
        }
        return order;
    }

    bool in_subtree(int x, int top) const {
        for (int v = x; v >= 0; v = parent[static_cast<std::size_t>(v)])
            if (v == top) return true;
        return false;
    }

    /// Planar path length from the root for every reachable node.
    std::vector<long long> path_lengths() const {
        std::vector<long long> d(nodes.size(), 0);
        for (int v : preorder()) {
            const int p = parent[static_cast<std::size_t>(v)];
            if (p >= 0) d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(p)] + l1(nodes[static_cast<std::size_t>(p)], nodes[static_cast<std::size_t>(v)]);
        }
        return d;
    }

    Topology to_topology() const {
        Topology t;
        t.nodes = nodes;
        t.root = root;
        for (int v : preorder()) {
            const int p = parent[static_cast<std::size_t>(v)];
            if (p >= 0) t.edges.emplace_back(p, v);
        }
        return t;
    }
};

/// Rectilinear MST over the terminals (Prim from the root, ties by id),
/// then greedy median-point Steinerization, oriented from the root.
inline RawTree l1_raw_tree(const RoutingGraph& g, const NetInstance& net) {
    const Topology base = terminal_nodes(g, net);
    std::vector<TopoNode> nodes = base.nodes;
    const std::size_t n = nodes.size();
    std::vector<std::vector<int>> adj(n);

    std::vector<char> in_tree(n, 0);
    std::vector<long long> best(n, std::numeric_limits<long long>::max());
    std::vector<int> from(n, -1);
    best[0] = 0;
    for (std::size_t step = 0; step < n; ++step) {
        int pick = -1;
        for (std::size_t v = 0; v < n; ++v) {
            if (!in_tree[v] && (pick < 0 || best[v] < best[static_cast<std::size_t>(pick)])) pick = static_cast<int>(v);
        }
        in_tree[static_cast<std::size_t>(pick)] = 1;
        if (from[static_cast<std::size_t>(pick)] >= 0) {
            adj[static_cast<std::size_t>(pick)].push_back(from[static_cast<std::size_t>(pick)]);
            adj[static_cast<std::size_t>(from[static_cast<std::size_t>(pick)])].push_back(pick);
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v]) continue;
            const long long d = l1(nodes[static_cast<std::size_t>(pick)], nodes[v]);
            if (d < best[v]) {
                best[v] = d;
                from[v] = pick;
            }
        }
    }

    // Replacing edges v-a and v-b by a star through the coordinate-wise
    // median m of (v, a, b) shortens the tree by l1(v, m).
    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            auto nb = adj[v];
            std::sort(nb.begin(), nb.end());
            int gain = 0;
            int ba = -1;
            int bb = -1;
            TopoNode bm{};
            for (std::size_t i = 0; i < nb.size(); ++i) {
                for (std::size_t j = i + 1; j < nb.size(); ++j) {
                    const TopoNode& a = nodes[static_cast<std::size_t>(nb[i])];
                    const TopoNode& b = nodes[static_cast<std::size_t>(nb[j])];
                    auto med = [](int p, int q, int r) { return std::max(std::min(p, q), std::min(std::max(p, q), r)); };
                    const TopoNode m{med(nodes[v].x, a.x, b.x), med(nodes[v].y, a.y, b.y), TopoKind::steiner, -1};
                    const int s = l1(nodes[v], m);
                    if (s > gain) {
                        gain = s;
                        ba = nb[i];
                        bb = nb[j];
                        bm = m;
                    }
                }
            }
            if (gain == 0) continue;
            const int m = static_cast<int>(nodes.size());
            nodes.push_back(bm);
            adj.emplace_back();
            auto unlink = [&adj](int x, int y) {
                std::erase(adj[static_cast<std::size_t>(x)], y);
                std::erase(adj[static_cast<std::size_t>(y)], x);
            };
            auto link = [&adj](int x, int y) {
                adj[static_cast<std::size_t>(x)].push_back(y);
                adj[static_cast<std::size_t>(y)].push_back(x);
            };
            unlink(static_cast<int>(v), ba);
            unlink(static_cast<int>(v), bb);
            link(static_cast<int>(v), m);
            link(m, ba);
            link(m, bb);
            improved = true;
        }
    }

    RawTree t;
    for (const TopoNode& x : nodes) t.add(x);
    t.root = 0;
    std::vector<char> seen(nodes.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        auto nb = adj[static_cast<std::size_t>(v)];
        std::sort(nb.begin(), nb.end());
        for (int c : nb) {
            if (seen[static_cast<std::size_t>(c)]) continue;
            seen[static_cast<std::size_t>(c)] = 1;
            t.attach(v, c);
            stack.push_back(c);
        }
    }
    return t;
}

/// Branch shares of lambda below `v` for the current raw tree; a sink with
/// children counts as one more branch of its own weight.
inline std::vector<double> raw_lambda_to(const RawTree& t, const NetInstance& net, std::vector<double>* subtree = nullptr) {
    const auto order = t.preorder();
    std::vector<double> w(t.nodes.size(), 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const TopoNode& x = t.nodes[static_cast<std::size_t>(*it)];
        double s = x.kind == TopoKind::sink ? net.sinks[static_cast<std::size_t>(x.sink_index)].weight : 0.0;
        for (int c : t.children[static_cast<std::size_t>(*it)]) s += w[static_cast<std::size_t>(c)];
        w[static_cast<std::size_t>(*it)] = s;
    }
    std::vector<double> lam(t.nodes.size(), 0.0);
    for (int v : order) {
        const auto& ch = t.children[static_cast<std::size_t>(v)];
        const TopoNode& x = t.nodes[static_cast<std::size_t>(v)];
        const bool self_branch = x.kind == TopoKind::sink && !ch.empty();
        const std::size_t branches = ch.size() + (self_branch ? 1 : 0);
        for (int c : ch) {
            double share = 0.0;
            if (branches >= 2) {
                share = optimal_lambda(w[static_cast<std::size_t>(c)], w[static_cast<std::size_t>(v)] - w[static_cast<std::size_t>(c)], net.eta).first;
            }
            lam[static_cast<std::size_t>(c)] = lam[static_cast<std::size_t>(v)] + share;
        }
    }
    if (subtree) *subtree = std::move(w);
    return lam;
}

} // namespace detail

/// Short rectilinear Steiner topology: L1 minimum spanning tree over the
/// terminals, Steinerized at median points, normalized.
inline Topology l1_topology(const RoutingGraph& g, const NetInstance& net) {
    if (net.sinks.empty()) throw ParameterError("at least one sink required");
    return normalize_topology(detail::l1_raw_tree(g, net).to_topology(), net);
}

/// Shallow-light topology: every sink's planar root path is at most
/// (1 + epsilon) times its L1 distance from the root.
///
/// A depth-first pass over the L1 tree reconnects each violating sink,
/// together with its subtree, directly to the root. A second pass over the
/// reconnected sinks, latest first, moves each one back under a former
/// ancestor when the bound still holds for its whole subtree and the tree
/// gets cheaper, where cost is planar length plus d_bif times the
/// lambda-weighted sink weights.
inline Topology shallow_light_topology(const RoutingGraph& g, const NetInstance& net, double epsilon) {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    if (net.sinks.empty()) throw ParameterError("at least one sink required");
    detail::RawTree t = detail::l1_raw_tree(g, net);
    const TopoNode root = t.nodes[0];
    auto bound = [&](int v) { return (1.0 + epsilon) * static_cast<double>(l1(root, t.nodes[static_cast<std::size_t>(v)])); };

    std::vector<std::vector<int>> ancestors(t.nodes.size());
    {
        for (int v : t.preorder()) {
            for (int a = t.parent[static_cast<std::size_t>(v)]; a > 0; a = t.parent[static_cast<std::size_t>(a)]) {
                ancestors[static_cast<std::size_t>(v)].push_back(a);
            }
        }
    }

    std::vector<long long> d(t.nodes.size(), 0);
    std::vector<int> cut;
    for (int v : t.preorder()) {
        const int p = t.parent[static_cast<std::size_t>(v)];
        if (p < 0) continue;
        d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(p)] + l1(t.nodes[static_cast<std::size_t>(p)], t.nodes[static_cast<std::size_t>(v)]);
        if (t.nodes[static_cast<std::size_t>(v)].kind == TopoKind::sink && p != 0 &&
            static_cast<double>(d[static_cast<std::size_t>(v)]) > bound(v)) {
            t.detach(v);
            t.attach(0, v);
            d[static_cast<std::size_t>(v)] = l1(root, t.nodes[static_cast<std::size_t>(v)]);
            cut.push_back(v);
        }
    }

    auto cost = [&](const detail::RawTree& x) {
        const Topology n = normalize_topology(x.to_topology(), net);
        return static_cast<double>(planar_length(n)) + net.d_bif * topology_weighted_lambda(n, net);
    };
    double current = cost(t);
    for (auto it = cut.rbegin(); it != cut.rend(); ++it) {
        const int v = *it;
        const auto dist = t.path_lengths();
        std::vector<int> sub;
        for (int x : t.preorder())
            if (t.in_subtree(x, v) && t.nodes[static_cast<std::size_t>(x)].kind == TopoKind::sink) sub.push_back(x);
        int best_q = -1;
        double best_cost = current;
        for (int q : ancestors[static_cast<std::size_t>(v)]) {
            if (t.in_subtree(q, v)) continue;
            const long long delta = dist[static_cast<std::size_t>(q)] + l1(t.nodes[static_cast<std::size_t>(q)], t.nodes[static_cast<std::size_t>(v)]) -
                                    dist[static_cast<std::size_t>(v)];
            bool ok = true;
            for (int y : sub) ok = ok && static_cast<double>(dist[static_cast<std::size_t>(y)] + delta) <= bound(y);
            if (!ok) continue;
            detail::RawTree trial = t;
            trial.detach(v);
            trial.attach(q, v);
            const double c = cost(trial);
            if (c < best_cost) {
                best_cost = c;
                best_q = q;
            }
        }
        if (best_q >= 0) {
            t.detach(v);
            t.attach(best_q, v);
            current = best_cost;
        }
    }
    return normalize_topology(t.to_topology(), net);
}

/// Prim-Dijkstra topology: grows the root component one sink at a time,
/// attaching at a node or at the closest point of an edge, minimizing
/// (1 - gamma) * added length + gamma * (root path length + bifurcation
/// penalty in length units). Ties by sink id, then added length.
inline Topology prim_dijkstra_topology(const RoutingGraph& g, const NetInstance& net, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("gamma out of [0, 1]");
    if (net.sinks.empty()) throw ParameterError("at least one sink required");
    const double delta = FutureCostTables::min_delay_per_unit(g);
    const double pen_scale = delta > 0.0 ? net.d_bif / delta : 0.0;

    detail::RawTree t;
    for (const TopoNode& x : terminal_nodes(g, net).nodes) t.add(x);
    t.root = 0;
    const std::size_t k = net.sinks.size();
    std::vector<char> connected(k + 1, 0);
    connected[0] = 1;

    for (std::size_t step = 0; step < k; ++step) {
        std::vector<double> w;
        const auto lam = detail::raw_lambda_to(t, net, &w);
        const auto d = t.path_lengths();
        const auto order = t.preorder();
        // (objective, sink, added, candidate order) ; candidate: node id or edge child id
        std::tuple<double, int, long long, int> best{std::numeric_limits<double>::infinity(), 0, 0, 0};
        int best_attach = -1;
        bool best_split = false;
        TopoNode best_point{};
        for (std::size_t s = 1; s <= k; ++s) {
            if (connected[s]) continue;
            const TopoNode& sp = t.nodes[s];
            const double ws = net.sinks[s - 1].weight;
            int cand = 0;
            auto consider = [&](int attach, bool split, const TopoNode& at, long long path_to, double lam_at, double w_other) {
                const long long added = l1(at, sp);
                const double share = w_other > 0.0 ? optimal_lambda(ws, w_other, net.eta).first : 0.0;
                const double obj = (1.0 - gamma) * static_cast<double>(added) +
                                   gamma * (static_cast<double>(path_to + added) + pen_scale * (lam_at + share));
                const std::tuple<double, int, long long, int> key{obj, static_cast<int>(s), added, cand++};
                if (key < best) {
                    best = key;
                    best_attach = attach;
                    best_split = split;
                    best_point = at;
                }
            };
            for (int v : order) {
                consider(v, false, t.nodes[static_cast<std::size_t>(v)], d[static_cast<std::size_t>(v)],
                         lam[static_cast<std::size_t>(v)], w[static_cast<std::size_t>(v)]);
            }
            for (int c : order) {
                const int p = t.parent[static_cast<std::size_t>(c)];
                if (p < 0) continue;
                const TopoNode& P = t.nodes[static_cast<std::size_t>(p)];
                const TopoNode& C = t.nodes[static_cast<std::size_t>(c)];
                const TopoNode m{std::clamp(sp.x, std::min(P.x, C.x), std::max(P.x, C.x)),
                                 std::clamp(sp.y, std::min(P.y, C.y), std::max(P.y, C.y)), TopoKind::steiner, -1};
                if ((m.x == P.x && m.y == P.y) || (m.x == C.x && m.y == C.y)) continue;
                consider(c, true, m, d[static_cast<std::size_t>(p)] + l1(P, m), lam[static_cast<std::size_t>(c)], w[static_cast<std::size_t>(c)]);
            }
        }
        const int s = std::get<1>(best);
        if (best_split) {
            const int c = best_attach;
            const int p = t.parent[static_cast<std::size_t>(c)];
            const int m = t.add(best_point);
            t.detach(c);
            t.attach(p, m);
            t.attach(m, c);
            t.attach(m, s);
        } else {
            t.attach(best_attach, s);
        }
        connected[static_cast<std::size_t>(s)] = 1;
    }
    return normalize_topology(t.to_topology(), net);
}

} // namespace cdst
