#pragma once

#include <cdst/tree.hpp>

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace cdst {

/// Undirected forest of placed nodes joined by embedded walks, grown one
/// connection at a time and turned into a bifurcation-compatible
/// EmbeddedTree by finalize(). Components are tracked with union-find.
class ForestBuilder {
public:
    explicit ForestBuilder(const RoutingGraph& g) : g_(g) {}

    int add_node(NodeRole role, VertexId pos, int sink_index = -1, double weight = 0.0) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({role, pos, sink_index, weight});
        incident_.emplace_back();
        uf_.push_back(id);
        comp_nodes_.push_back({id});
        comp_links_.emplace_back();
        return id;
    }

    /// Joins `a` and `b` by `walk`, which must lead from a's position to b's.
    int add_link(int a, int b, std::vector<EdgeId> walk) {
        if (walk_end(g_, nodes_[static_cast<std::size_t>(a)].pos, walk) != nodes_[static_cast<std::size_t>(b)].pos) {
            throw ValidationError("link walk does not join its endpoints");
        }
        const int id = static_cast<int>(links_.size());
        links_.push_back({a, b, std::move(walk), true});
        incident_[static_cast<std::size_t>(a)].push_back(id);
        incident_[static_cast<std::size_t>(b)].push_back(id);
        const int ca = component(a);
        const int cb = component(b);
        if (ca == cb) {
            comp_links_[static_cast<std::size_t>(ca)].push_back(id);
        } else {
            const int c = unite(ca, cb);
            comp_links_[static_cast<std::size_t>(c)].push_back(id);
        }
        return id;
    }

    int component(int node) const {
        int r = node;
        while (uf_[static_cast<std::size_t>(r)] != r) r = uf_[static_cast<std::size_t>(r)];
        return r;
    }

    VertexId position(int node) const { return nodes_[static_cast<std::size_t>(node)].pos; }
    std::size_t node_count() const { return nodes_.size(); }

    /// A node of component `comp` at vertex `v`: an existing node (lowest
    /// degree, then lowest id) or a new Steiner node splitting a link.
    int node_at(int comp, VertexId v) {
        comp = component(comp);
        int best = -1;
        for (int n : comp_nodes_[static_cast<std::size_t>(comp)]) {
            if (nodes_[static_cast<std::size_t>(n)].pos != v) continue;
            if (best < 0 || degree(n) < degree(best) || (degree(n) == degree(best) && n < best)) best = n;
        }
        if (best >= 0) return best;
        std::vector<int> links = comp_links_[static_cast<std::size_t>(comp)];
        std::sort(links.begin(), links.end());
        for (int l : links) {
            const Link& lk = links_[static_cast<std::size_t>(l)];
            if (!lk.alive) continue;
            VertexId cur = nodes_[static_cast<std::size_t>(lk.a)].pos;
            for (std::size_t i = 0; i + 1 < lk.walk.size(); ++i) {
                cur = g_.edge(lk.walk[i]).other(cur);
                if (cur == v) return split(l, i + 1);
            }
        }
        throw ValidationError("vertex " + std::to_string(v) + " is not covered by the component");
    }

    /// Vertices covered by the component, sorted.
    std::vector<VertexId> component_vertices(int comp) const {
        comp = component(comp);
        std::vector<VertexId> out;
        for (int n : comp_nodes_[static_cast<std::size_t>(comp)]) out.push_back(nodes_[static_cast<std::size_t>(n)].pos);
        for (int l : comp_links_[static_cast<std::size_t>(comp)]) {
            const Link& lk = links_[static_cast<std::size_t>(l)];
            if (!lk.alive) continue;
            VertexId cur = nodes_[static_cast<std::size_t>(lk.a)].pos;
            for (EdgeId e : lk.walk) {
                cur = g_.edge(e).other(cur);
                out.push_back(cur);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Edges used by the component, sorted.
    std::vector<EdgeId> component_edges(int comp) const {
        comp = component(comp);
        std::vector<EdgeId> out;
        for (int l : comp_links_[static_cast<std::size_t>(comp)]) {
            const Link& lk = links_[static_cast<std::size_t>(l)];
            if (lk.alive) out.insert(out.end(), lk.walk.begin(), lk.walk.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Orients the forest from `root_node` and normalizes it: a co-located
    /// Steiner node under a branching root, sinks pushed to leaves, Steiner
    /// out-degree reduced to at most 2 by pairing the lightest subtrees,
    /// out-degree-1 Steiner nodes contracted and Steiner leaves dropped.
    EmbeddedTree finalize(const NetInstance& net, int root_node) const {
        MTree t = orient(root_node);
        t.prune_steiner_leaves();
        t.split_root();
        t.push_sinks_to_leaves();
        t.binarize();
        t.contract();
        EmbeddedTree out = t.emit();
        finalize_tree(g_, net, out);
        return out;
    }

private:
    struct Node {
        NodeRole role;
        VertexId pos;
        int sink_index;
        double weight;
    };

    struct Link {
        int a;
        int b;
        std::vector<EdgeId> walk;  // from a's position to b's
        bool alive;
    };

    struct MNode {
        NodeRole role;
        VertexId pos;
        int sink_index;
        double weight;
        int parent = -1;
        std::vector<EdgeId> in_walk;
        std::vector<int> children;
        bool alive = true;
    };

    struct MTree {
        const RoutingGraph* g = nullptr;
        std::vector<MNode> n;
        int root = -1;

        int add(NodeRole role, VertexId pos) {
            n.push_back({role, pos, -1, 0.0, -1, {}, {}, true});
            return static_cast<int>(n.size()) - 1;
        }

        std::vector<int> preorder() const {
            std::vector<int> order;
            std::vector<int> stack{root};
            while (!stack.empty()) {
                const int v = stack.back();
                stack.pop_back();
                order.push_back(v);
                const auto& ch = n[static_cast<std::size_t>(v)].children;
                for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
            }
            return order;
        }

        void replace_child(int parent, int from, int to) {
            auto& ch = n[static_cast<std::size_t>(parent)].children;
            *std::find(ch.begin(), ch.end(), from) = to;
        }

        void prune_steiner_leaves() {
            const auto order = preorder();
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                MNode& x = n[static_cast<std::size_t>(*it)];
                if (x.role != NodeRole::steiner || !x.children.empty() || x.parent < 0) continue;
                std::erase(n[static_cast<std::size_t>(x.parent)].children, *it);
                x.alive = false;
            }
        }

        void split_root() {
            if (n[static_cast<std::size_t>(root)].children.size() <= 1) return;
            const int x = add(NodeRole::steiner, n[static_cast<std::size_t>(root)].pos);
            n[static_cast<std::size_t>(x)].children = std::move(n[static_cast<std::size_t>(root)].children);
            for (int c : n[static_cast<std::size_t>(x)].children) n[static_cast<std::size_t>(c)].parent = x;
            n[static_cast<std::size_t>(root)].children = {x};
            n[static_cast<std::size_t>(x)].parent = root;
        }

        void push_sinks_to_leaves() {
            const std::size_t count = n.size();
            for (std::size_t s = 0; s < count; ++s) {
                if (!n[s].alive || n[s].role != NodeRole::sink || n[s].children.empty()) continue;
                const int x = add(NodeRole::steiner, n[s].pos);
                MNode& sink = n[s];
                MNode& st = n[static_cast<std::size_t>(x)];
                st.parent = sink.parent;
                st.in_walk = std::move(sink.in_walk);
                replace_child(sink.parent, static_cast<int>(s), x);
                st.children = std::move(sink.children);
                st.children.push_back(static_cast<int>(s));
                for (int c : st.children) n[static_cast<std::size_t>(c)].parent = x;
                sink.children.clear();
                sink.in_walk.clear();
            }
        }

        std::vector<double> subtree_weights() const {
            std::vector<double> w(n.size(), 0.0);
            const auto order = preorder();
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                const MNode& x = n[static_cast<std::size_t>(*it)];
                double s = x.role == NodeRole::sink ? x.weight : 0.0;
                for (int c : x.children) s += w[static_cast<std::size_t>(c)];
                w[static_cast<std::size_t>(*it)] = s;
            }
            return w;
        }

        void binarize() {
            auto w = subtree_weights();
            const std::size_t count = n.size();
            for (std::size_t v = 0; v < count; ++v) {
                if (!n[v].alive || n[v].role != NodeRole::steiner || n[v].children.size() <= 2) continue;
                std::vector<int> items = n[v].children;
                while (items.size() > 2) {
                    auto lighter = [&w](int a, int b) {
                        const double wa = w[static_cast<std::size_t>(a)];
                        const double wb = w[static_cast<std::size_t>(b)];
                        return wa != wb ? wa < wb : a < b;
                    };
                    std::sort(items.begin(), items.end(), lighter);
                    const int y = add(NodeRole::steiner, n[v].pos);
                    w.push_back(w[static_cast<std::size_t>(items[0])] + w[static_cast<std::size_t>(items[1])]);
                    n[static_cast<std::size_t>(y)].children = {items[0], items[1]};
                    n[static_cast<std::size_t>(y)].parent = static_cast<int>(v);
                    n[static_cast<std::size_t>(items[0])].parent = y;
                    n[static_cast<std::size_t>(items[1])].parent = y;
                    items.erase(items.begin(), items.begin() + 2);
                    items.push_back(y);
                }
                std::sort(items.begin(), items.end());
                n[v].children = items;
            }
        }

        void contract() {
            for (int v : preorder()) {
                MNode& x = n[static_cast<std::size_t>(v)];
                if (x.role != NodeRole::steiner || x.children.size() != 1) continue;
                const int c = x.children.front();
                MNode& child = n[static_cast<std::size_t>(c)];
                std::vector<EdgeId> walk = x.in_walk;
                for (EdgeId e : child.in_walk) {
                    if (!walk.empty() && walk.back() == e) {
                        walk.pop_back();
                    } else {
                        walk.push_back(e);
                    }
                }
                child.in_walk = std::move(walk);
                child.parent = x.parent;
                replace_child(x.parent, v, c);
                x.children.clear();
                x.alive = false;
            }
        }

        EmbeddedTree emit() const {
            EmbeddedTree out;
            const auto order = preorder();
            std::vector<int> index(n.size(), -1);
            for (int v : order) {
                index[static_cast<std::size_t>(v)] = static_cast<int>(out.nodes.size());
                const MNode& x = n[static_cast<std::size_t>(v)];
                out.nodes.push_back({x.role, x.pos, x.role == NodeRole::sink ? x.weight : 0.0, x.sink_index});
            }
            for (int v : order) {
                const MNode& x = n[static_cast<std::size_t>(v)];
                if (x.parent < 0) continue;
                out.arcs.push_back({index[static_cast<std::size_t>(x.parent)], index[static_cast<std::size_t>(v)], x.in_walk, 0.0});
            }
            out.root = 0;
            return out;
        }
    };

    int degree(int node) const {
        int d = 0;
        for (int l : incident_[static_cast<std::size_t>(node)]) d += links_[static_cast<std::size_t>(l)].alive ? 1 : 0;
        return d;
    }

    int unite(int a, int b) {
        if (comp_nodes_[static_cast<std::size_t>(a)].size() + comp_links_[static_cast<std::size_t>(a)].size() <
            comp_nodes_[static_cast<std::size_t>(b)].size() + comp_links_[static_cast<std::size_t>(b)].size()) {
            std::swap(a, b);
        }
        uf_[static_cast<std::size_t>(b)] = a;
        auto& na = comp_nodes_[static_cast<std::size_t>(a)];
        auto& nb = comp_nodes_[static_cast<std::size_t>(b)];
        na.insert(na.end(), nb.begin(), nb.end());
        nb.clear();
        auto& la = comp_links_[static_cast<std::size_t>(a)];
        auto& lb = comp_links_[static_cast<std::size_t>(b)];
        la.insert(la.end(), lb.begin(), lb.end());
        lb.clear();
        return a;
    }

    int split(int link, std::size_t offset) {
        Link old = links_[static_cast<std::size_t>(link)];
        links_[static_cast<std::size_t>(link)].alive = false;
        const VertexId v = walk_end(g_, nodes_[static_cast<std::size_t>(old.a)].pos,
                                    std::span<const EdgeId>(old.walk.data(), offset));
        const int x = add_node(NodeRole::steiner, v);
        std::vector<EdgeId> first(old.walk.begin(), old.walk.begin() + static_cast<std::ptrdiff_t>(offset));
        std::vector<EdgeId> second(old.walk.begin() + static_cast<std::ptrdiff_t>(offset), old.walk.end());
        add_link(old.a, x, std::move(first));
        add_link(x, old.b, std::move(second));
        return x;
    }

    MTree orient(int root_node) const {
        MTree t;
        t.g = &g_;
        t.n.reserve(nodes_.size() * 2);
        for (const Node& x : nodes_) t.n.push_back({x.role, x.pos, x.sink_index, x.weight, -1, {}, {}, true});
        t.root = root_node;
        std::vector<char> seen(nodes_.size(), 0);
        std::vector<int> via(nodes_.size(), -1);
        std::vector<int> stack{root_node};
        seen[static_cast<std::size_t>(root_node)] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            std::vector<int> inc = incident_[static_cast<std::size_t>(v)];
            std::sort(inc.begin(), inc.end());
            for (int l : inc) {
                const Link& lk = links_[static_cast<std::size_t>(l)];
                if (!lk.alive) continue;
                const int c = lk.a == v ? lk.b : lk.a;
                if (via[static_cast<std::size_t>(v)] == l) continue;
                if (seen[static_cast<std::size_t>(c)]) throw ValidationError("forest contains a cycle");
                seen[static_cast<std::size_t>(c)] = 1;
                via[static_cast<std::size_t>(c)] = l;
                MNode& child = t.n[static_cast<std::size_t>(c)];
                child.parent = v;
                child.in_walk = lk.walk;
                if (lk.a != v) std::reverse(child.in_walk.begin(), child.in_walk.end());
                t.n[static_cast<std::size_t>(v)].children.push_back(c);
                stack.push_back(c);
            }
        }
        for (std::size_t v = 0; v < nodes_.size(); ++v) {
            if (!seen[v]) {
                if (nodes_[v].role != NodeRole::steiner) throw ValidationError("terminal not connected to the root");
                t.n[v].alive = false;
            }
        }
        return t;
    }

    const RoutingGraph& g_;
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<int>> incident_;
    std::vector<int> uf_;
    std::vector<std::vector<int>> comp_nodes_;
    std::vector<std::vector<int>> comp_links_;
};

} // namespace cdst
