#pragma once

#include <cdst/dijkstra.hpp>
#include <cdst/topology.hpp>
#include <cdst/tree.hpp>

#include <vector>

namespace cdst {

/// Optimal embedding of a fixed topology into the routing graph.
///
/// Lambda is fixed from the topology's subtree weights. Bottom-up, each
/// child a of a node gets A_a(x) = min_y [B_a(y) + dist_{c + W_a d}(x, y)]
/// + lambda_a d_bif W_a via one multi-seeded Dijkstra, and B_u is the sum of
/// A over u's children (B_sink is 0 at the sink's position). The root's
/// single child A evaluated at the root position is the optimum. Positions
/// are then read off the stored searches top-down.
inline EmbeddedTree embed_topology_optimal(const RoutingGraph& g, const NetInstance& net, const Topology& topo,
                                           double* dp_value = nullptr) {
    validate_instance(g, net);
    validate_topology(topo, net.sinks.size());
    const auto idx = detail::index_topology(topo);
    const auto w = topology_subtree_weights(topo, net);
    const std::size_t n = topo.nodes.size();

    std::vector<double> share(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& ch = idx.children[v];
        if (ch.size() == 2) {
            const auto [l0, l1] = optimal_lambda(w[static_cast<std::size_t>(ch[0])], w[static_cast<std::size_t>(ch[1])], net.eta);
            share[static_cast<std::size_t>(ch[0])] = l0;
            share[static_cast<std::size_t>(ch[1])] = l1;
        }
    }

    const std::size_t nv = g.vertex_count();
    std::vector<ShortestPaths> sp(n);
    std::vector<std::vector<double>> b(n);
    for (auto it = idx.preorder.rbegin(); it != idx.preorder.rend(); ++it) {
        const auto v = static_cast<std::size_t>(*it);
        const TopoNode& node = topo.nodes[v];
        if (node.kind == TopoKind::sink) {
            b[v].assign(nv, kInfinity);
            b[v][static_cast<std::size_t>(net.sinks[static_cast<std::size_t>(node.sink_index)].position)] = 0.0;
        } else {
            b[v].assign(nv, 0.0);
            for (int c : idx.children[v]) {
                const double pen = share[static_cast<std::size_t>(c)] * net.d_bif * w[static_cast<std::size_t>(c)];
                const auto& dc = sp[static_cast<std::size_t>(c)].dist;
                for (std::size_t x = 0; x < nv; ++x) b[v][x] += dc[x] + pen;
            }
        }
        if (node.kind == TopoKind::root) continue;
        std::vector<Seed> seeds;
        for (std::size_t x = 0; x < nv; ++x)
            if (b[v][x] < kInfinity) seeds.push_back({static_cast<VertexId>(x), b[v][x]});
        sp[v] = dijkstra(g, std::span<const Seed>(seeds), cost_distance_length(g, w[v]));
        b[v].clear();
        b[v].shrink_to_fit();
    }
    const auto r = static_cast<std::size_t>(topo.root);
    const double value = b[r][static_cast<std::size_t>(net.root)];
    if (!(value < kInfinity)) throw ExhaustionError("topology cannot be embedded: unreachable position");
    if (dp_value) *dp_value = value;

    EmbeddedTree tree;
    tree.root = topo.root;
    tree.nodes.resize(n);
    std::vector<VertexId> pos(n, kNoVertex);
    pos[r] = net.root;
    for (int vi : idx.preorder) {
        const auto v = static_cast<std::size_t>(vi);
        for (int ci : idx.children[v]) {
            const auto c = static_cast<std::size_t>(ci);
            TreeArc arc;
            arc.parent = vi;
            arc.child = ci;
            arc.walk = path_to_seed(g, sp[c], pos[v]);
            pos[c] = walk_end(g, pos[v], arc.walk);
            tree.arcs.push_back(std::move(arc));
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        const TopoNode& node = topo.nodes[v];
        TreeNode& out = tree.nodes[v];
        out.position = pos[v];
        out.sink_index = node.sink_index;
        switch (node.kind) {
        case TopoKind::root: out.role = NodeRole::root; break;
        case TopoKind::sink:
            out.role = NodeRole::sink;
            out.weight = net.sinks[static_cast<std::size_t>(node.sink_index)].weight;
            break;
        case TopoKind::steiner: out.role = NodeRole::steiner; break;
        }
    }
    finalize_tree(g, net, tree);
    return tree;
}

} // namespace cdst
