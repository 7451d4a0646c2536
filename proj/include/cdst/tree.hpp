#pragma once

#include <cdst/graph.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace cdst {

/// Split of the bifurcation penalty between two branches whose subtrees
/// carry delay weights `w_x` and `w_y`. The heavier branch receives the
/// smaller share `eta`; equal weights split evenly.
inline std::pair<double, double> optimal_lambda(double w_x, double w_y, double eta) {
    if (!(eta >= 0.0 && eta <= 0.5)) throw ParameterError("eta out of [0, 1/2]");
    double lx;
    if (w_x > w_y) {
        lx = eta;
    } else if (w_x == w_y) {
        lx = 0.5;
    } else {
        lx = 1.0 - eta;
    }
    return {lx, 1.0 - lx};
}

/// Minimum weighted bifurcation penalty when two branches of weights `w` and
/// `w2` meet: d_bif * (eta * max + (1 - eta) * min).
inline double beta(double w, double w2, double d_bif, double eta) {
    return d_bif * (eta * std::max(w, w2) + (1.0 - eta) * std::min(w, w2));
}

enum class NodeRole { root, sink, steiner };

inline const char* to_string(NodeRole r) {
    switch (r) {
    case NodeRole::root: return "root";
    case NodeRole::sink: return "sink";
    case NodeRole::steiner: return "steiner";
    }
    return "?";
}

struct TreeNode {
    NodeRole role = NodeRole::steiner;
    VertexId position = kNoVertex;
    double weight = 0.0;  // delay weight for sinks, 0 otherwise
    int sink_index = -1;
};

/// Parent-to-child connection embedded as a walk from the parent's position
/// to the child's position. An empty walk joins co-located nodes.
struct TreeArc {
    int parent = -1;
    int child = -1;
    std::vector<EdgeId> walk;
    double lambda = 0.0;
};

struct CostBreakdown {
    double connection_cost = 0.0;
    double weighted_wire_delay = 0.0;
    double weighted_bif_penalty = 0.0;
    double total = 0.0;
};

struct EmbeddedTree {
    std::vector<TreeNode> nodes;
    std::vector<TreeArc> arcs;
    int root = 0;
    CostBreakdown cost;
};

namespace detail {

struct TreeIndex {
    std::vector<int> in_arc;                 // arc entering each node, -1 for root
    std::vector<std::vector<int>> out_arcs;  // arcs leaving each node, in arc order
    std::vector<int> preorder;               // nodes, root first
};

[[noreturn]] inline void violation(const std::string& what) {
    throw ValidationError("tree invariant violated: " + what);
}

/// Checks the arborescence and bifurcation-compatibility invariants and the
/// embedding of every arc. Stored lambda values are not inspected.
inline TreeIndex check_structure(const RoutingGraph& g, const NetInstance& net, const EmbeddedTree& t) {
    const int n = static_cast<int>(t.nodes.size());
    if (t.root < 0 || t.root >= n) violation("root index out of range");
    TreeIndex idx;
    idx.in_arc.assign(static_cast<std::size_t>(n), -1);
    idx.out_arcs.assign(static_cast<std::size_t>(n), {});
    for (std::size_t a = 0; a < t.arcs.size(); ++a) {
        const TreeArc& arc = t.arcs[a];
        if (arc.parent < 0 || arc.parent >= n || arc.child < 0 || arc.child >= n) {
            violation("arc " + std::to_string(a) + " endpoint out of range");
        }
        if (idx.in_arc[static_cast<std::size_t>(arc.child)] != -1) {
            violation("node " + std::to_string(arc.child) + " has two parents");
        }
        idx.in_arc[static_cast<std::size_t>(arc.child)] = static_cast<int>(a);
        idx.out_arcs[static_cast<std::size_t>(arc.parent)].push_back(static_cast<int>(a));
        const VertexId end = walk_end(g, t.nodes[static_cast<std::size_t>(arc.parent)].position, arc.walk);
        if (end == kNoVertex) violation("arc " + std::to_string(a) + " walk is not contiguous");
        if (end != t.nodes[static_cast<std::size_t>(arc.child)].position) {
            violation("arc " + std::to_string(a) + " walk does not end at the child position");
        }
    }
    if (idx.in_arc[static_cast<std::size_t>(t.root)] != -1) violation("root has a parent");
    if (t.arcs.size() + 1 != t.nodes.size()) violation("arc count must be node count - 1");

    // Reachability from the root (with the arc count this implies a tree).
    std::vector<int> stack{t.root};
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    seen[static_cast<std::size_t>(t.root)] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        idx.preorder.push_back(v);
        const auto& outs = idx.out_arcs[static_cast<std::size_t>(v)];
        for (auto it = outs.rbegin(); it != outs.rend(); ++it) {
            const int c = t.arcs[static_cast<std::size_t>(*it)].child;
            if (seen[static_cast<std::size_t>(c)]) violation("cycle through node " + std::to_string(c));
            seen[static_cast<std::size_t>(c)] = 1;
            stack.push_back(c);
        }
    }
    if (static_cast<int>(idx.preorder.size()) != n) violation("not all nodes reachable from the root");

    std::vector<int> sink_seen(net.sinks.size(), 0);
    for (int v = 0; v < n; ++v) {
        const TreeNode& node = t.nodes[static_cast<std::size_t>(v)];
        const auto outdeg = idx.out_arcs[static_cast<std::size_t>(v)].size();
        switch (node.role) {
        case NodeRole::root:
            if (v != t.root) violation("root role on a non-root node");
            if (node.position != net.root) violation("root node not at the root position");
            if (!net.sinks.empty() && outdeg != 1) violation("root must have out-degree 1");
            break;
        case NodeRole::sink: {
            if (node.sink_index < 0 || static_cast<std::size_t>(node.sink_index) >= net.sinks.size()) {
                violation("sink node " + std::to_string(v) + " has an invalid sink index");
            }
            const Sink& s = net.sinks[static_cast<std::size_t>(node.sink_index)];
            if (node.position != s.position) violation("sink node " + std::to_string(v) + " misplaced");
            if (node.weight != s.weight) violation("sink node " + std::to_string(v) + " weight mismatch");
            if (outdeg != 0) violation("sink node " + std::to_string(v) + " is not a leaf");
            ++sink_seen[static_cast<std::size_t>(node.sink_index)];
            break;
        }
        case NodeRole::steiner:
            if (v == t.root) violation("root node must have the root role");
            if (outdeg == 0) violation("steiner node " + std::to_string(v) + " is a leaf");
            if (outdeg > 2) violation("steiner node " + std::to_string(v) + " has out-degree > 2");
            if (!g.valid_vertex(node.position)) violation("steiner node position out of range");
            break;
        }
    }
    if (t.nodes[static_cast<std::size_t>(t.root)].role != NodeRole::root) violation("root node role");
    for (std::size_t i = 0; i < sink_seen.size(); ++i) {
        if (sink_seen[i] != 1) violation("sink " + std::to_string(i) + " must appear exactly once");
    }
    return idx;
}

/// Subtree sink weights (post-order accumulation).
inline std::vector<double> subtree_weights(const EmbeddedTree& t, const TreeIndex& idx) {
    std::vector<double> w(t.nodes.size(), 0.0);
    for (auto it = idx.preorder.rbegin(); it != idx.preorder.rend(); ++it) {
        const int v = *it;
        double s = t.nodes[static_cast<std::size_t>(v)].role == NodeRole::sink
                       ? t.nodes[static_cast<std::size_t>(v)].weight
                       : 0.0;
        for (int a : idx.out_arcs[static_cast<std::size_t>(v)]) {
            s += w[static_cast<std::size_t>(t.arcs[static_cast<std::size_t>(a)].child)];
        }
        w[static_cast<std::size_t>(v)] = s;
    }
    return w;
}

/// Lambda of every arc: weight-ordered split at out-degree-2 nodes, 0 elsewhere.
inline std::vector<double> arc_lambdas(const EmbeddedTree& t, const TreeIndex& idx, double eta) {
    const auto w = subtree_weights(t, idx);
    std::vector<double> lambda(t.arcs.size(), 0.0);
    for (std::size_t v = 0; v < t.nodes.size(); ++v) {
        const auto& outs = idx.out_arcs[v];
        if (outs.size() != 2) continue;
        const int ax = outs[0];
        const int ay = outs[1];
        const auto [lx, ly] = optimal_lambda(w[static_cast<std::size_t>(t.arcs[static_cast<std::size_t>(ax)].child)],
                                             w[static_cast<std::size_t>(t.arcs[static_cast<std::size_t>(ay)].child)], eta);
        lambda[static_cast<std::size_t>(ax)] = lx;
        lambda[static_cast<std::size_t>(ay)] = ly;
    }
    return lambda;
}

} // namespace detail

/// Objective of `tree`: connection cost plus weighted linear delay plus
/// weighted bifurcation penalties. Lambda is recomputed from subtree
/// weights; values stored in the tree are ignored.
inline CostBreakdown evaluate_cost(const RoutingGraph& g, const NetInstance& net, const EmbeddedTree& tree) {
    const auto idx = detail::check_structure(g, net, tree);
    const auto lambda = detail::arc_lambdas(tree, idx, net.eta);

    CostBreakdown out;
    std::vector<double> arc_delay(tree.arcs.size(), 0.0);
    for (std::size_t a = 0; a < tree.arcs.size(); ++a) {
        out.connection_cost += walk_cost(g, tree.arcs[a].walk);
        arc_delay[a] = walk_delay(g, tree.arcs[a].walk);
    }

    std::vector<double> delay_to(tree.nodes.size(), 0.0);
    std::vector<double> lambda_to(tree.nodes.size(), 0.0);
    for (int v : idx.preorder) {
        const int a = idx.in_arc[static_cast<std::size_t>(v)];
        if (a < 0) continue;
        const int p = tree.arcs[static_cast<std::size_t>(a)].parent;
        delay_to[static_cast<std::size_t>(v)] = delay_to[static_cast<std::size_t>(p)] + arc_delay[static_cast<std::size_t>(a)];
        lambda_to[static_cast<std::size_t>(v)] = lambda_to[static_cast<std::size_t>(p)] + lambda[static_cast<std::size_t>(a)];
    }

    std::vector<int> node_of_sink(net.sinks.size(), -1);
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
        if (tree.nodes[v].role == NodeRole::sink) node_of_sink[static_cast<std::size_t>(tree.nodes[v].sink_index)] = static_cast<int>(v);
    }
    for (std::size_t i = 0; i < net.sinks.size(); ++i) {
        const auto v = static_cast<std::size_t>(node_of_sink[i]);
        const double w = net.sinks[i].weight;
        out.weighted_wire_delay += w * delay_to[v];
        out.weighted_bif_penalty += w * (lambda_to[v] * net.d_bif);
    }
    out.total = out.connection_cost + out.weighted_wire_delay + out.weighted_bif_penalty;
    return out;
}

/// Writes optimal lambdas into the arcs and stores the evaluated cost.
inline void finalize_tree(const RoutingGraph& g, const NetInstance& net, EmbeddedTree& tree) {
    const auto idx = detail::check_structure(g, net, tree);
    const auto lambda = detail::arc_lambdas(tree, idx, net.eta);
    for (std::size_t a = 0; a < tree.arcs.size(); ++a) tree.arcs[a].lambda = lambda[a];
    tree.cost = evaluate_cost(g, net, tree);
}

inline bool relative_close(double a, double b, double rel) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= rel * scale || a == b;
}

/// Full validation: structure, stored lambdas and stored cost.
inline void validate_tree(const RoutingGraph& g, const NetInstance& net, const EmbeddedTree& tree) {
    const auto idx = detail::check_structure(g, net, tree);
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
        const auto& outs = idx.out_arcs[v];
        if (outs.size() == 2) {
            const double lx = tree.arcs[static_cast<std::size_t>(outs[0])].lambda;
            const double ly = tree.arcs[static_cast<std::size_t>(outs[1])].lambda;
            if (std::abs(lx + ly - 1.0) > 1e-12) detail::violation("lambda pair does not sum to 1");
            for (double l : {lx, ly}) {
                if (l < net.eta - 1e-12 || l > 1.0 - net.eta + 1e-12) detail::violation("lambda outside [eta, 1-eta]");
            }
        } else {
            for (int a : outs) {
                if (tree.arcs[static_cast<std::size_t>(a)].lambda != 0.0) detail::violation("lambda on a non-branching arc");
            }
        }
    }
    const CostBreakdown c = evaluate_cost(g, net, tree);
    if (!relative_close(c.total, tree.cost.total, 1e-9)) detail::violation("stored cost differs from evaluation");
}

} // namespace cdst
