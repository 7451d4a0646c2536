#pragma once

#include <cdst/graph.hpp>
#include <cdst/tree.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

namespace cdst {

enum class TopoKind { root, sink, steiner };

inline const char* to_string(TopoKind k) {
    switch (k) {
    case TopoKind::root: return "root";
    case TopoKind::sink: return "sink";
    case TopoKind::steiner: return "steiner";
    }
    return "?";
}

struct TopoNode {
    int x = 0;
    int y = 0;
    TopoKind kind = TopoKind::steiner;
    int sink_index = -1;
};

/// Abstract tree over the terminals plus Steiner nodes with planar
/// positions. Edges point from parent to child.
struct Topology {
    std::vector<TopoNode> nodes;
    std::vector<std::pair<int, int>> edges;
    int root = 0;
};

inline int l1(const TopoNode& a, const TopoNode& b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

namespace detail {

struct TopoIndex {
    std::vector<int> parent;
    std::vector<std::vector<int>> children;
    std::vector<int> preorder;
};

inline TopoIndex index_topology(const Topology& t) {
    const std::size_t n = t.nodes.size();
    TopoIndex idx{std::vector<int>(n, -1), std::vector<std::vector<int>>(n), {}};
    for (const auto& [p, c] : t.edges) {
        if (p < 0 || c < 0 || static_cast<std::size_t>(p) >= n || static_cast<std::size_t>(c) >= n) {
            throw ValidationError("topology edge endpoint out of range");
        }
        if (idx.parent[static_cast<std::size_t>(c)] != -1) throw ValidationError("topology node with two parents");
        idx.parent[static_cast<std::size_t>(c)] = p;
        idx.children[static_cast<std::size_t>(p)].push_back(c);
    }
    std::vector<int> stack{t.root};
    std::vector<char> seen(n, 0);
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (seen[static_cast<std::size_t>(v)]) throw ValidationError("topology contains a cycle");
        seen[static_cast<std::size_t>(v)] = 1;
        idx.preorder.push_back(v);
        const auto& ch = idx.children[static_cast<std::size_t>(v)];
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    if (idx.preorder.size() != n) throw ValidationError("topology is not connected");
    return idx;
}

} // namespace detail

/// Throws ValidationError unless `t` is a bifurcation-compatible tree in
/// which every sink of a `sink_count`-sink net appears exactly once.
inline void validate_topology(const Topology& t, std::size_t sink_count) {
    if (t.root < 0 || static_cast<std::size_t>(t.root) >= t.nodes.size()) throw ValidationError("topology root out of range");
    if (t.edges.size() + 1 != t.nodes.size()) throw ValidationError("topology edge count must be node count - 1");
    const auto idx = detail::index_topology(t);
    std::vector<int> seen(sink_count, 0);
    for (std::size_t v = 0; v < t.nodes.size(); ++v) {
        const auto outdeg = idx.children[v].size();
        const TopoNode& x = t.nodes[v];
        switch (x.kind) {
        case TopoKind::root:
            if (static_cast<int>(v) != t.root) throw ValidationError("root kind on a non-root node");
            if (sink_count > 0 && outdeg != 1) throw ValidationError("topology root must have one child");
            break;
        case TopoKind::sink:
            if (x.sink_index < 0 || static_cast<std::size_t>(x.sink_index) >= sink_count) throw ValidationError("topology sink index out of range");
            if (outdeg != 0) throw ValidationError("topology sink is not a leaf");
            ++seen[static_cast<std::size_t>(x.sink_index)];
            break;
        case TopoKind::steiner:
            if (outdeg == 0 || outdeg > 2) throw ValidationError("topology steiner node must have 1 or 2 children");
            break;
        }
    }
    if (t.nodes[static_cast<std::size_t>(t.root)].kind != TopoKind::root) throw ValidationError("topology root kind");
    for (int s : seen)
        if (s != 1) throw ValidationError("every sink must appear exactly once in the topology");
}

/// Sink weight below every node.
inline std::vector<double> topology_subtree_weights(const Topology& t, const NetInstance& net) {
    const auto idx = detail::index_topology(t);
    std::vector<double> w(t.nodes.size(), 0.0);
    for (auto it = idx.preorder.rbegin(); it != idx.preorder.rend(); ++it) {
        const TopoNode& x = t.nodes[static_cast<std::size_t>(*it)];
        double s = x.kind == TopoKind::sink ? net.sinks[static_cast<std::size_t>(x.sink_index)].weight : 0.0;
        for (int c : idx.children[static_cast<std::size_t>(*it)]) s += w[static_cast<std::size_t>(c)];
        w[static_cast<std::size_t>(*it)] = s;
    }
    return w;
}

inline long long planar_length(const Topology& t) {
    long long s = 0;
    for (const auto& [p, c] : t.edges) s += l1(t.nodes[static_cast<std::size_t>(p)], t.nodes[static_cast<std::size_t>(c)]);
    return s;
}

/// Planar root-to-node path length of every node.
inline std::vector<long long> planar_path_lengths(const Topology& t) {
    const auto idx = detail::index_topology(t);
    std::vector<long long> d(t.nodes.size(), 0);
    for (int v : idx.preorder) {
        const int p = idx.parent[static_cast<std::size_t>(v)];
        if (p >= 0) d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(p)] + l1(t.nodes[static_cast<std::size_t>(p)], t.nodes[static_cast<std::size_t>(v)]);
    }
    return d;
}

/// Sum over sinks of w * (sum of lambda on the root path), with lambda from
/// subtree weights at every two-child node.
inline double topology_weighted_lambda(const Topology& t, const NetInstance& net) {
    const auto idx = detail::index_topology(t);
    const auto w = topology_subtree_weights(t, net);
    std::vector<double> lam(t.nodes.size(), 0.0);
    double total = 0.0;
    for (int v : idx.preorder) {
        const auto& ch = idx.children[static_cast<std::size_t>(v)];
        if (ch.size() == 2) {
            const auto [la, lb] = optimal_lambda(w[static_cast<std::size_t>(ch[0])], w[static_cast<std::size_t>(ch[1])], net.eta);
            lam[static_cast<std::size_t>(ch[0])] = lam[static_cast<std::size_t>(v)] + la;
            lam[static_cast<std::size_t>(ch[1])] = lam[static_cast<std::size_t>(v)] + lb;
        } else {
            for (int c : ch) lam[static_cast<std::size_t>(c)] = lam[static_cast<std::size_t>(v)];
        }
        const TopoNode& x = t.nodes[static_cast<std::size_t>(v)];
        if (x.kind == TopoKind::sink) total += net.sinks[static_cast<std::size_t>(x.sink_index)].weight * lam[static_cast<std::size_t>(v)];
    }
    return total;
}

/// Rewrites an arbitrary rooted tree over the terminals into a
/// bifurcation-compatible one with the same planar edges: Steiner leaves
/// dropped, a co-located Steiner node under a branching root, sinks pushed
/// to leaves, wide Steiner nodes split by pairing the lightest subtrees, and
/// single-child Steiner nodes contracted. Node ids are reassigned in
/// preorder.
inline Topology normalize_topology(const Topology& in, const NetInstance& net) {
    auto idx = detail::index_topology(in);
    std::vector<TopoNode> nodes = in.nodes;
    std::vector<int> parent = idx.parent;
    std::vector<std::vector<int>> children = idx.children;
    std::vector<char> alive(nodes.size(), 1);

    auto add = [&](TopoKind kind, const TopoNode& at) {
        nodes.push_back({at.x, at.y, kind, -1});
        parent.push_back(-1);
        children.emplace_back();
        alive.push_back(1);
        return static_cast<int>(nodes.size()) - 1;
    };
    auto preorder = [&]() {
        std::vector<int> order;
        std::vector<int> stack{in.root};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            order.push_back(v);
            const auto& ch = children[static_cast<std::size_t>(v)];
            for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
        }
        return order;
    };
    auto replace_child = [&](int p, int from, int to) {
        auto& ch = children[static_cast<std::size_t>(p)];
        *std::find(ch.begin(), ch.end(), from) = to;
    };

    {
        const auto order = preorder();
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const int v = *it;
            if (nodes[static_cast<std::size_t>(v)].kind != TopoKind::steiner || !children[static_cast<std::size_t>(v)].empty()) continue;
            std::erase(children[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])], v);
            alive[static_cast<std::size_t>(v)] = 0;
        }
    }
    if (children[static_cast<std::size_t>(in.root)].size() > 1) {
        const int x = add(TopoKind::steiner, nodes[static_cast<std::size_t>(in.root)]);
        children[static_cast<std::size_t>(x)] = std::move(children[static_cast<std::size_t>(in.root)]);
        for (int c : children[static_cast<std::size_t>(x)]) parent[static_cast<std::size_t>(c)] = x;
        children[static_cast<std::size_t>(in.root)] = {x};
        parent[static_cast<std::size_t>(x)] = in.root;
    }
    for (std::size_t s = 0, n0 = nodes.size(); s < n0; ++s) {
        if (!alive[s] || nodes[s].kind != TopoKind::sink || children[s].empty()) continue;
        const int x = add(TopoKind::steiner, nodes[s]);
        parent[static_cast<std::size_t>(x)] = parent[s];
        replace_child(parent[s], static_cast<int>(s), x);
        children[static_cast<std::size_t>(x)] = std::move(children[s]);
        children[static_cast<std::size_t>(x)].push_back(static_cast<int>(s));
        for (int c : children[static_cast<std::size_t>(x)]) parent[static_cast<std::size_t>(c)] = x;
        children[s].clear();
    }
    {
        std::vector<double> w(nodes.size(), 0.0);
        const auto order = preorder();
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const TopoNode& x = nodes[static_cast<std::size_t>(*it)];
            double s = x.kind == TopoKind::sink ? net.sinks[static_cast<std::size_t>(x.sink_index)].weight : 0.0;
            for (int c : children[static_cast<std::size_t>(*it)]) s += w[static_cast<std::size_t>(c)];
            w[static_cast<std::size_t>(*it)] = s;
        }
        for (std::size_t v = 0, n0 = nodes.size(); v < n0; ++v) {
            if (!alive[v] || nodes[v].kind != TopoKind::steiner || children[v].size() <= 2) continue;
            std::vector<int> items = children[v];
            while (items.size() > 2) {
                std::sort(items.begin(), items.end(), [&w](int a, int b) {
                    const double wa = w[static_cast<std::size_t>(a)];
                    const double wb = w[static_cast<std::size_t>(b)];
                    return wa != wb ? wa < wb : a < b;
                });
                const int y = add(TopoKind::steiner, nodes[v]);
                w.push_back(w[static_cast<std::size_t>(items[0])] + w[static_cast<std::size_t>(items[1])]);
                children[static_cast<std::size_t>(y)] = {items[0], items[1]};
                parent[static_cast<std::size_t>(y)] = static_cast<int>(v);
                parent[static_cast<std::size_t>(items[0])] = y;
                parent[static_cast<std::size_t>(items[1])] = y;
                items.erase(items.begin(), items.begin() + 2);
                items.push_back(y);
            }
            std::sort(items.begin(), items.end());
            children[v] = items;
        }
    }
    for (int v : preorder()) {
        if (nodes[static_cast<std::size_t>(v)].kind != TopoKind::steiner || children[static_cast<std::size_t>(v)].size() != 1) continue;
        const int c = children[static_cast<std::size_t>(v)].front();
        replace_child(parent[static_cast<std::size_t>(v)], v, c);
        parent[static_cast<std::size_t>(c)] = parent[static_cast<std::size_t>(v)];
        children[static_cast<std::size_t>(v)].clear();
        alive[static_cast<std::size_t>(v)] = 0;
    }

    Topology out;
    const auto order = preorder();
    std::vector<int> id(nodes.size(), -1);
    for (int v : order) {
        id[static_cast<std::size_t>(v)] = static_cast<int>(out.nodes.size());
        out.nodes.push_back(nodes[static_cast<std::size_t>(v)]);
    }
    for (int v : order) {
        const int p = parent[static_cast<std::size_t>(v)];
        if (v != in.root) out.edges.emplace_back(id[static_cast<std::size_t>(p)], id[static_cast<std::size_t>(v)]);
    }
    out.root = 0;
    return out;
}

/// Terminal-only topology skeleton: node 0 is the root, node i+1 is sink i,
/// positions from the graph's planar coordinates. No edges.
inline Topology terminal_nodes(const RoutingGraph& g, const NetInstance& net) {
    Topology t;
    const GridPoint& r = g.point(net.root);
    t.nodes.push_back({r.x, r.y, TopoKind::root, -1});
    for (std::size_t i = 0; i < net.sinks.size(); ++i) {
        const GridPoint& p = g.point(net.sinks[i].position);
        t.nodes.push_back({p.x, p.y, TopoKind::sink, static_cast<int>(i)});
    }
    return t;
}

/// Structured text: {"nodes": [[id, x, y, kind], ...], "edges": [[parent, child], ...]}.
inline std::string topology_to_string(const Topology& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const TopoNode& x = t.nodes[i];
        nodes.push_back({i, x.x, x.y, to_string(x.kind)});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [p, c] : t.edges) edges.push_back({p, c});
    nlohmann::json doc;
    doc["nodes"] = std::move(nodes);
    doc["edges"] = std::move(edges);
    doc["root"] = t.root;
    return doc.dump() + "\n";
}

} // namespace cdst
