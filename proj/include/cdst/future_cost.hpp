#pragma once

#include <cdst/dijkstra.hpp>
#include <cdst/graph.hpp>
#include <cdst/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace cdst {

/// Landmark (ALT) lower bounds on connection cost plus an L1-based lower
/// bound on delay. Immutable once built.
class FutureCostTables {
public:
    FutureCostTables() = default;

    /// Tables from an explicit landmark list.
    static FutureCostTables from_landmarks(const RoutingGraph& g, std::vector<VertexId> landmarks) {
        FutureCostTables t;
        t.n_ = g.vertex_count();
        t.landmarks_ = std::move(landmarks);
        t.table_.resize(t.landmarks_.size() * t.n_);
        for (std::size_t k = 0; k < t.landmarks_.size(); ++k) {
            const auto sp = dijkstra(g, t.landmarks_[k], [&g](EdgeId e) { return g.edge(e).cost; });
            std::copy(sp.dist.begin(), sp.dist.end(), t.table_.begin() + static_cast<std::ptrdiff_t>(k * t.n_));
        }
        t.min_delay_per_unit_ = min_delay_per_unit(g);
        t.points_ = g.vertices();
        return t;
    }

    std::size_t landmark_count() const { return landmarks_.size(); }
    const std::vector<VertexId>& landmarks() const { return landmarks_; }
    double delay_per_unit() const { return min_delay_per_unit_; }

    double landmark_distance(std::size_t k, VertexId v) const {
        return table_[k * n_ + static_cast<std::size_t>(v)];
    }

    /// Lower bound on the c-distance between `a` and `b`.
    double cost_bound(VertexId a, VertexId b) const {
        double best = 0.0;
        for (std::size_t k = 0; k < landmarks_.size(); ++k) {
            const double da = table_[k * n_ + static_cast<std::size_t>(a)];
            const double db = table_[k * n_ + static_cast<std::size_t>(b)];
            if (da == kInfinity || db == kInfinity) continue;
            best = std::max(best, std::abs(da - db));
        }
        return best;
    }

    /// Upper bound on the c-distance between `a` and `b` through a landmark.
    double cost_upper_bound(VertexId a, VertexId b) const {
        double best = kInfinity;
        for (std::size_t k = 0; k < landmarks_.size(); ++k) {
            best = std::min(best, table_[k * n_ + static_cast<std::size_t>(a)] + table_[k * n_ + static_cast<std::size_t>(b)]);
        }
        return best;
    }

    int planar_distance(VertexId a, VertexId b) const {
        const GridPoint& p = points_[static_cast<std::size_t>(a)];
        const GridPoint& q = points_[static_cast<std::size_t>(b)];
        return std::abs(p.x - q.x) + std::abs(p.y - q.y);
    }

    /// Lower bound on the delay of any path between `a` and `b`.
    double delay_bound(VertexId a, VertexId b) const {
        return min_delay_per_unit_ * planar_distance(a, b);
    }

    /// Lower bound on dist_{c + w d}(a, b).
    double bound(VertexId a, VertexId b, double w) const {
        return cost_bound(a, b) + w * delay_bound(a, b);
    }

    /// Smallest delay per unit of planar length over all planar edges, i.e.
    /// the fastest layer and wire type combination.
    static double min_delay_per_unit(const RoutingGraph& g) {
        double best = kInfinity;
        for (const GraphEdge& e : g.edges()) {
            const int len = g.planar_distance(e.u, e.v);
            if (len > 0) best = std::min(best, e.delay / len);
        }
        return best == kInfinity ? 0.0 : best;
    }

private:
    std::size_t n_ = 0;
    std::vector<VertexId> landmarks_;
    std::vector<double> table_;
    std::vector<GridPoint> points_;
    double min_delay_per_unit_ = 0.0;
};

/// Landmarks: the planar corners of the lowest layer, then farthest-point
/// sampling on c-distance. The seed orders candidates for tie-breaking.
inline FutureCostTables build_future_costs(const RoutingGraph& g, int landmark_count, std::uint64_t seed) {
    if (landmark_count < 1) throw ParameterError("landmark_count must be >= 1");
    if (g.vertex_count() == 0) throw ParameterError("empty graph");

    int min_layer = g.point(0).layer;
    for (const GridPoint& p : g.vertices()) min_layer = std::min(min_layer, p.layer);
    // Corner order: min(x+y), max(x+y), min(x-y), max(x-y); ties by index.
    std::vector<VertexId> corners(4, kNoVertex);
    auto better = [&](int slot, VertexId cand) {
        if (corners[static_cast<std::size_t>(slot)] == kNoVertex) return true;
        const GridPoint& a = g.point(cand);
        const GridPoint& b = g.point(corners[static_cast<std::size_t>(slot)]);
        switch (slot) {
        case 0: return a.x + a.y < b.x + b.y;
        case 1: return a.x + a.y > b.x + b.y;
        case 2: return a.x - a.y < b.x - b.y;
        default: return a.x - a.y > b.x - b.y;
        }
    };
    for (VertexId v = 0; v < static_cast<VertexId>(g.vertex_count()); ++v) {
        if (g.point(v).layer != min_layer) continue;
        for (int s = 0; s < 4; ++s)
            if (better(s, v)) corners[static_cast<std::size_t>(s)] = v;
    }
    std::vector<VertexId> landmarks;
    for (VertexId c : corners) {
        if (static_cast<int>(landmarks.size()) >= landmark_count) break;
        if (std::find(landmarks.begin(), landmarks.end(), c) == landmarks.end()) landmarks.push_back(c);
    }

    if (static_cast<int>(landmarks.size()) < landmark_count) {
        Rng rng(seed);
        std::vector<std::uint64_t> rank(g.vertex_count());
        for (auto& r : rank) r = rng.next();
        std::vector<double> nearest(g.vertex_count(), kInfinity);
        auto absorb = [&](VertexId l) {
            const auto sp = dijkstra(g, l, [&g](EdgeId e) { return g.edge(e).cost; });
            for (std::size_t v = 0; v < nearest.size(); ++v) nearest[v] = std::min(nearest[v], sp.dist[v]);
        };
        for (VertexId l : landmarks) absorb(l);
        while (static_cast<int>(landmarks.size()) < landmark_count &&
               landmarks.size() < g.vertex_count()) {
            VertexId pick = kNoVertex;
            for (VertexId v = 0; v < static_cast<VertexId>(g.vertex_count()); ++v) {
                const auto vi = static_cast<std::size_t>(v);
                if (nearest[vi] == kInfinity || nearest[vi] <= 0.0) continue;
                if (pick == kNoVertex || nearest[vi] > nearest[static_cast<std::size_t>(pick)] ||
                    (nearest[vi] == nearest[static_cast<std::size_t>(pick)] && rank[vi] < rank[static_cast<std::size_t>(pick)])) {
                    pick = v;
                }
            }
            if (pick == kNoVertex) break;
            landmarks.push_back(pick);
            absorb(pick);
        }
    }
    return FutureCostTables::from_landmarks(g, std::move(landmarks));
}

} // namespace cdst
