#pragma once

#include <cdst/graph.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <utility>

namespace cdst {

inline constexpr int kInstanceFormatVersion = 1;

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError(path + ": missing key '" + key + "'");
    }
    return obj.at(key);
}

inline double as_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected a number");
    return j.get<double>();
}

inline long long as_integer(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ParseError(path + ": expected an integer");
    return j.get<long long>();
}

inline const nlohmann::json& as_tuple(const nlohmann::json& j, std::size_t n, const std::string& path) {
    if (!j.is_array() || j.size() != n) {
        throw ParseError(path + ": expected an array of " + std::to_string(n) + " values");
    }
    return j;
}

} // namespace detail

/// Serializes a graph and net in the versioned instance format. Edge order is
/// preserved, so edge indices survive a round trip.
inline std::string instance_to_string(const RoutingGraph& graph, const NetInstance& net) {
    using nlohmann::json;
    std::ostringstream out;
    out << "{\n  \"version\": " << kInstanceFormatVersion << ",\n  \"graph\": {\n    \"vertices\": [";
    for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
        const GridPoint& p = graph.vertices()[i];
        out << (i ? ",\n      " : "\n      ") << json::array({p.x, p.y, p.layer}).dump();
    }
    out << "\n    ],\n    \"edges\": [";
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const GraphEdge& e = graph.edges()[i];
        out << (i ? ",\n      " : "\n      ")
            << json::array({e.u, e.v, e.cost, e.delay, e.wire_type}).dump();
    }
    out << "\n    ]\n  },\n  \"net\": {\n    \"root\": " << net.root << ",\n    \"sinks\": [";
    for (std::size_t i = 0; i < net.sinks.size(); ++i) {
        out << (i ? ",\n      " : "\n      ")
            << json::array({net.sinks[i].position, net.sinks[i].weight}).dump();
    }
    out << "\n    ]\n  },\n  \"params\": {\"d_bif\": " << json(net.d_bif).dump()
        << ", \"eta\": " << json(net.eta).dump() << "}\n}\n";
    return out.str();
}

inline std::pair<RoutingGraph, NetInstance> instance_from_string(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("syntax error: ") + e.what());
    }
    const auto version = detail::as_integer(detail::require(doc, "version", "$"), "version");
    if (version != kInstanceFormatVersion) {
        throw ParseError("unknown format version " + std::to_string(version));
    }

    const json& g = detail::require(doc, "graph", "$");
    const json& jv = detail::require(g, "vertices", "graph");
    const json& je = detail::require(g, "edges", "graph");
    if (!jv.is_array()) throw ParseError("graph.vertices: expected an array");
    if (!je.is_array()) throw ParseError("graph.edges: expected an array");

    std::vector<GridPoint> vertices;
    vertices.reserve(jv.size());
    for (std::size_t i = 0; i < jv.size(); ++i) {
        const std::string path = "graph.vertices[" + std::to_string(i) + "]";
        const json& t = detail::as_tuple(jv[i], 3, path);
        vertices.push_back({static_cast<int>(detail::as_integer(t[0], path + "[0]")),
                            static_cast<int>(detail::as_integer(t[1], path + "[1]")),
                            static_cast<int>(detail::as_integer(t[2], path + "[2]"))});
    }
    const auto n = static_cast<long long>(vertices.size());
    std::vector<GraphEdge> edges;
    edges.reserve(je.size());
    for (std::size_t i = 0; i < je.size(); ++i) {
        const std::string path = "graph.edges[" + std::to_string(i) + "]";
        const json& t = detail::as_tuple(je[i], 5, path);
        const long long u = detail::as_integer(t[0], path + "[0]");
        const long long v = detail::as_integer(t[1], path + "[1]");
        const double c = detail::as_number(t[2], path + "[2]");
        const double d = detail::as_number(t[3], path + "[3]");
        const long long wt = detail::as_integer(t[4], path + "[4]");
        if (u < 0 || u >= n || v < 0 || v >= n) throw ParseError(path + ": endpoint out of range");
        if (!(c >= 0.0)) throw ParseError(path + ": negative edge cost");
        if (!(d >= 0.0)) throw ParseError(path + ": negative edge delay");
        edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), c, d, static_cast<int>(wt)});
    }

    const json& jn = detail::require(doc, "net", "$");
    NetInstance net;
    const long long root = detail::as_integer(detail::require(jn, "root", "net"), "net.root");
    if (root < 0 || root >= n) throw ParseError("net.root: vertex out of range");
    net.root = static_cast<VertexId>(root);
    const json& js = detail::require(jn, "sinks", "net");
    if (!js.is_array()) throw ParseError("net.sinks: expected an array");
    for (std::size_t i = 0; i < js.size(); ++i) {
        const std::string path = "net.sinks[" + std::to_string(i) + "]";
        const json& t = detail::as_tuple(js[i], 2, path);
        const long long pos = detail::as_integer(t[0], path + "[0]");
        const double w = detail::as_number(t[1], path + "[1]");
        if (pos < 0 || pos >= n) throw ParseError(path + ": vertex out of range");
        if (!(w > 0.0)) throw ParseError(path + ": weight must be > 0");
        net.sinks.push_back({static_cast<VertexId>(pos), w});
    }

    const json& jp = detail::require(doc, "params", "$");
    net.d_bif = detail::as_number(detail::require(jp, "d_bif", "params"), "params.d_bif");
    net.eta = detail::as_number(detail::require(jp, "eta", "params"), "params.eta");
    if (!(net.d_bif >= 0.0)) throw ParseError("params.d_bif: must be >= 0");
    if (!(net.eta >= 0.0 && net.eta <= 0.5)) throw ParseError("params.eta: eta out of [0, 1/2]");

    RoutingGraph graph(std::move(vertices), std::move(edges));
    if (!graph.is_connected()) throw ParseError("graph: not connected");
    return {std::move(graph), std::move(net)};
}

inline void write_instance(const RoutingGraph& graph, const NetInstance& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << instance_to_string(graph, net);
    if (!out) throw Error("write to '" + path + "' failed");
}

inline std::pair<RoutingGraph, NetInstance> read_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return instance_from_string(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace cdst
