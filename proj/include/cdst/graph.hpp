#pragma once

#include <cdst/types.hpp>

#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cdst {

struct GridPoint {
    int x = 0;
    int y = 0;
    int layer = 0;

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct GraphEdge {
    VertexId u = kNoVertex;
    VertexId v = kNoVertex;
    double cost = 0.0;   // congestion cost c(e)
    double delay = 0.0;  // linear delay d(e)
    int wire_type = 0;

    VertexId other(VertexId w) const { return w == u ? v : u; }

    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Undirected routing graph. Parallel edges are allowed and are told
/// apart by their index. Adjacency is stored in CSR form in edge-index order.
class RoutingGraph {
public:
    RoutingGraph() = default;

    RoutingGraph(std::vector<GridPoint> vertices, std::vector<GraphEdge> edges)
        : vertices_(std::move(vertices)), edges_(std::move(edges)) {
        const auto n = static_cast<VertexId>(vertices_.size());
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const GraphEdge& e = edges_[i];
            if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
                throw ValidationError("edge " + std::to_string(i) + ": endpoint out of range");
            }
            if (!(e.cost >= 0.0) || !std::isfinite(e.cost)) {
                throw ValidationError("edge " + std::to_string(i) + ": cost must be finite and >= 0");
            }
            if (!(e.delay >= 0.0) || !std::isfinite(e.delay)) {
                throw ValidationError("edge " + std::to_string(i) + ": delay must be finite and >= 0");
            }
        }
        build_adjacency();
    }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const GridPoint& point(VertexId v) const { return vertices_[static_cast<std::size_t>(v)]; }
    const GraphEdge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }

    const std::vector<GridPoint>& vertices() const { return vertices_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }

    /// Incident edge indices of `v`.
    std::span<const EdgeId> incident(VertexId v) const {
        const auto b = adj_offset_[static_cast<std::size_t>(v)];
        const auto e = adj_offset_[static_cast<std::size_t>(v) + 1];
        return {adj_.data() + b, adj_.data() + e};
    }

    bool valid_vertex(VertexId v) const {
        return v >= 0 && static_cast<std::size_t>(v) < vertices_.size();
    }

    /// Planar L1 distance between two vertices (layers ignored).
    int planar_distance(VertexId a, VertexId b) const {
        const GridPoint& p = point(a);
        const GridPoint& q = point(b);
        return std::abs(p.x - q.x) + std::abs(p.y - q.y);
    }

    bool is_connected() const {
        if (vertices_.empty()) return true;
        std::vector<char> seen(vertices_.size(), 0);
        std::vector<VertexId> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const VertexId v = stack.back();
            stack.pop_back();
            for (EdgeId e : incident(v)) {
                const VertexId w = edge(e).other(v);
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        return count == vertices_.size();
    }

    friend bool operator==(const RoutingGraph& a, const RoutingGraph& b) {
        return a.vertices_ == b.vertices_ && a.edges_ == b.edges_;
    }

private:
    void build_adjacency() {
        const std::size_t n = vertices_.size();
        adj_offset_.assign(n + 1, 0);
        for (const GraphEdge& e : edges_) {
            ++adj_offset_[static_cast<std::size_t>(e.u) + 1];
            if (e.v != e.u) ++adj_offset_[static_cast<std::size_t>(e.v) + 1];
        }
        for (std::size_t i = 0; i < n; ++i) adj_offset_[i + 1] += adj_offset_[i];
        adj_.assign(adj_offset_[n], kNoEdge);
        std::vector<std::size_t> fill(adj_offset_.begin(), adj_offset_.end() - 1);
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const GraphEdge& e = edges_[i];
            adj_[fill[static_cast<std::size_t>(e.u)]++] = static_cast<EdgeId>(i);
            if (e.v != e.u) adj_[fill[static_cast<std::size_t>(e.v)]++] = static_cast<EdgeId>(i);
        }
    }

    std::vector<GridPoint> vertices_;
    std::vector<GraphEdge> edges_;
    std::vector<std::size_t> adj_offset_;
    std::vector<EdgeId> adj_;
};

struct Sink {
    VertexId position = kNoVertex;
    double weight = 1.0;

    friend bool operator==(const Sink&, const Sink&) = default;
};

/// One net: a root, weighted sinks and the bifurcation penalty model.
struct NetInstance {
    VertexId root = kNoVertex;
    std::vector<Sink> sinks;
    double d_bif = 0.0;
    double eta = 0.5;

    std::size_t terminal_count() const { return sinks.size() + 1; }

    double total_weight() const {
        double w = 0.0;
        for (const Sink& s : sinks) w += s.weight;
        return w;
    }

    friend bool operator==(const NetInstance&, const NetInstance&) = default;
};

/// Throws ValidationError if `net` is inconsistent with `graph`.
inline void validate_instance(const RoutingGraph& graph, const NetInstance& net) {
    if (!graph.valid_vertex(net.root)) throw ValidationError("root position out of range");
    for (std::size_t i = 0; i < net.sinks.size(); ++i) {
        const Sink& s = net.sinks[i];
        if (!graph.valid_vertex(s.position)) {
            throw ValidationError("sink " + std::to_string(i) + ": position out of range");
        }
        if (!(s.weight > 0.0) || !std::isfinite(s.weight)) {
            throw ValidationError("sink " + std::to_string(i) + ": weight must be > 0");
        }
    }
    if (!(net.d_bif >= 0.0) || !std::isfinite(net.d_bif)) throw ValidationError("d_bif must be >= 0");
    if (!(net.eta >= 0.0 && net.eta <= 0.5)) throw ValidationError("eta out of [0, 1/2]");
}

/// Sum of edge costs along a walk.
inline double walk_cost(const RoutingGraph& g, std::span<const EdgeId> walk) {
    double s = 0.0;
    for (EdgeId e : walk) s += g.edge(e).cost;
    return s;
}

inline double walk_delay(const RoutingGraph& g, std::span<const EdgeId> walk) {
    double s = 0.0;
    for (EdgeId e : walk) s += g.edge(e).delay;
    return s;
}

/// Follows `walk` from `start`; returns the end vertex or kNoVertex if the
/// walk is not contiguous.
inline VertexId walk_end(const RoutingGraph& g, VertexId start, std::span<const EdgeId> walk) {
    VertexId cur = start;
    for (EdgeId e : walk) {
        if (e < 0 || static_cast<std::size_t>(e) >= g.edge_count()) return kNoVertex;
        const GraphEdge& ge = g.edge(e);
        if (ge.u == cur) {
            cur = ge.v;
        } else if (ge.v == cur) {
            cur = ge.u;
        } else {
            return kNoVertex;
        }
    }
    return cur;
}

/// Vertex sequence visited by `walk` starting at `start` (size walk.size()+1).
inline std::vector<VertexId> walk_vertices(const RoutingGraph& g, VertexId start,
                                           std::span<const EdgeId> walk) {
    std::vector<VertexId> out;
    out.reserve(walk.size() + 1);
    out.push_back(start);
    VertexId cur = start;
    for (EdgeId e : walk) {
        cur = g.edge(e).other(cur);
        out.push_back(cur);
    }
    return out;
}

} // namespace cdst
