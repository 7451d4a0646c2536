#pragma once

#include <cdst/graph.hpp>
#include <cdst/rng.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace cdst {

enum class CongestionProfile { uniform, hotspots };
enum class WeightProfile { unit, lognormal };

struct GridSpec {
    std::uint64_t seed = 1;
    int width = 6;
    int height = 6;
    int layers = 2;
    int wire_types = 1;
    int sink_count = 3;
    CongestionProfile congestion = CongestionProfile::uniform;
    WeightProfile weights = WeightProfile::unit;
    double d_bif = 0.0;
    double eta = 0.5;
};

struct GridInstance {
    RoutingGraph graph;
    NetInstance net;
};

inline VertexId grid_vertex(const GridSpec& s, int x, int y, int layer) {
    return static_cast<VertexId>((layer * s.height + y) * s.width + x);
}

/// Deterministic layered 3D routing grid.
///
/// Even layers carry horizontal edges and odd layers vertical ones; a
/// single-layer grid carries both directions so that it stays connected.
/// Each planar edge exists once per wire type k with cost factor (1 + k/2)
/// and delay factor 1/(1 + k/2). Delay per unit length halves on every
/// higher layer pair. Vias join adjacent layers at every (x, y).
inline GridInstance generate_grid_instance(const GridSpec& spec) {
    if (spec.width < 2 || spec.height < 2) throw ParameterError("width and height must be >= 2");
    if (spec.layers < 1) throw ParameterError("layers must be >= 1");
    if (spec.wire_types < 1) throw ParameterError("wire_types must be >= 1");
    if (spec.sink_count < 1) throw ParameterError("sink_count must be >= 1");
    const std::int64_t n = static_cast<std::int64_t>(spec.width) * spec.height * spec.layers;
    if (spec.sink_count + 1 > n) throw ParameterError("sink_count + 1 exceeds the number of vertices");
    if (!(spec.eta >= 0.0 && spec.eta <= 0.5)) throw ParameterError("eta out of [0, 1/2]");
    if (!(spec.d_bif >= 0.0)) throw ParameterError("d_bif must be >= 0");

    Rng rng(spec.seed);

    // Hotspot rectangles with cost multipliers in [2, 8].
    struct Hotspot {
        int x0, y0, x1, y1;
        double factor;
    };
    std::vector<Hotspot> hotspots;
    if (spec.congestion == CongestionProfile::hotspots) {
        const int count = 1 + spec.width * spec.height / 64;
        const int max_w = std::max(1, spec.width / 4);
        const int max_h = std::max(1, spec.height / 4);
        for (int i = 0; i < count; ++i) {
            const int w = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_w)));
            const int h = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_h)));
            const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.width - w + 1)));
            const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.height - h + 1)));
            const double f = rng.uniform(2.0, 8.0);
            hotspots.push_back({x0, y0, x0 + w - 1, y0 + h - 1, f});
        }
    }
    auto congestion_at = [&](int x, int y) {
        double f = 1.0;
        for (const Hotspot& h : hotspots) {
            if (x >= h.x0 && x <= h.x1 && y >= h.y0 && y <= h.y1) f = std::max(f, h.factor);
        }
        return f;
    };

    std::vector<GridPoint> vertices;
    vertices.reserve(static_cast<std::size_t>(n));
    for (int l = 0; l < spec.layers; ++l)
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x) vertices.push_back({x, y, l});

    std::vector<GraphEdge> edges;
    auto add_planar = [&](int layer, int x0, int y0, int x1, int y1) {
        const double base_delay = 1.0 / static_cast<double>(1 << (layer / 2));
        const double cong = std::max(congestion_at(x0, y0), congestion_at(x1, y1));
        for (int k = 0; k < spec.wire_types; ++k) {
            const double mult = 1.0 + 0.5 * k;
            edges.push_back({grid_vertex(spec, x0, y0, layer), grid_vertex(spec, x1, y1, layer),
                             cong * mult, base_delay / mult, k});
        }
    };
    for (int l = 0; l < spec.layers; ++l) {
        const bool horizontal = spec.layers == 1 || l % 2 == 0;
        const bool vertical = spec.layers == 1 || l % 2 == 1;
        if (horizontal) {
            for (int y = 0; y < spec.height; ++y)
                for (int x = 0; x + 1 < spec.width; ++x) add_planar(l, x, y, x + 1, y);
        }
        if (vertical) {
            for (int y = 0; y + 1 < spec.height; ++y)
                for (int x = 0; x < spec.width; ++x) add_planar(l, x, y, x, y + 1);
        }
    }
    for (int l = 0; l + 1 < spec.layers; ++l) {
        const double via_delay = 0.25 / static_cast<double>(1 << (l / 2));
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x)
                edges.push_back({grid_vertex(spec, x, y, l), grid_vertex(spec, x, y, l + 1), 1.0,
                                 via_delay, 0});
    }

    // Root first, then sinks; distinct positions by partial Fisher-Yates.
    std::vector<VertexId> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    const auto picks = static_cast<std::size_t>(spec.sink_count) + 1;
    for (std::size_t i = 0; i < picks; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }

    NetInstance net;
    net.root = pool[0];
    net.d_bif = spec.d_bif;
    net.eta = spec.eta;
    for (std::size_t i = 1; i < picks; ++i) {
        double w = 1.0;
        if (spec.weights == WeightProfile::lognormal) w = std::exp(rng.normal());
        net.sinks.push_back({pool[i], w});
    }
    return {RoutingGraph(std::move(vertices), std::move(edges)), std::move(net)};
}

inline std::string to_string(CongestionProfile p) {
    return p == CongestionProfile::uniform ? "uniform" : "hotspots";
}
inline std::string to_string(WeightProfile p) {
    return p == WeightProfile::unit ? "unit" : "lognormal";
}

} // namespace cdst
