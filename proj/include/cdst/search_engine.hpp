#pragma once

#include <cdst/future_cost.hpp>
#include <cdst/graph.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cdst {

struct EngineOptions {
    bool two_level_heap = true;
    bool astar = false;
    const FutureCostTables* future = nullptr;  // required when astar is set
    /// Multiplier on every heuristic value. Anything above 1 makes the
    /// heuristic inadmissible; only used as a negative control.
    double heuristic_scale = 1.0;
};

/// A search source: one terminal with its own length c(e) + w * d(e).
/// Edges of its start component have their c-part zeroed.
struct SourceSpec {
    TerminalId id = -1;
    double weight = 1.0;
    VertexId start = kNoVertex;
    std::vector<VertexId> component_vertices;
    std::vector<EdgeId> component_edges;
};

/// A target: a terminal position inside its component. A search that enters
/// the component continues on component edges at zero c-cost, tagged with
/// this target, until it reaches `position`.
struct TargetSpec {
    TerminalId id = -1;
    double weight = 1.0;
    bool is_root = false;
    VertexId position = kNoVertex;
    std::vector<VertexId> component_vertices;
    std::vector<EdgeId> component_edges;
};

struct Hit {
    TerminalId source = -1;
    TerminalId target = -1;
    bool target_is_root = false;
    double value = 0.0;     // distance + penalty
    double distance = 0.0;
    double penalty = 0.0;
    double source_weight = 0.0;
    VertexId target_vertex = kNoVertex;
    std::vector<EdgeId> walk;      // from the source start to the target position
    std::size_t entry_index = 0;   // walk[entry_index..] runs inside the target component
};

struct EngineCounters {
    std::uint64_t labels_scanned = 0;
    std::uint64_t heap_pushes = 0;
    std::uint64_t heap_pops = 0;
    std::uint64_t rekeys = 0;
};

using PenaltyFn = std::function<double(TerminalId source, TerminalId target)>;

/// Simultaneous Dijkstra (optionally A*) searches, one per live source, over
/// a shared immutable graph. Labels persist across merges; only target
/// penalties are re-evaluated. Extraction order is
/// (key, source id, vertex id, tag) in both heap layouts.
class SearchEngine {
public:
    SearchEngine(const RoutingGraph& g, EngineOptions options, PenaltyFn penalty = nullptr)
        : g_(g), opt_(options), penalty_(std::move(penalty)),
          vertex_targets_(g.vertex_count()), edge_targets_(g.edge_count()) {
        if (opt_.astar && opt_.future == nullptr) throw ParameterError("A* requires future cost tables");
        if (!penalty_) penalty_ = [](TerminalId, TerminalId) { return 0.0; };
    }

    SearchEngine(const SearchEngine&) = delete;
    SearchEngine& operator=(const SearchEngine&) = delete;

    const EngineCounters& counters() const { return counters_; }

    void add_source(SourceSpec spec) {
        if (sources_.count(spec.id)) throw ParameterError("duplicate source id " + std::to_string(spec.id));
        if (!g_.valid_vertex(spec.start)) throw ParameterError("source start out of range");
        if (!(spec.weight >= 0.0)) throw ParameterError("source weight must be >= 0");
        auto s = std::make_unique<Source>();
        const std::size_t n = g_.vertex_count();
        s->id = spec.id;
        s->weight = spec.weight;
        s->start = spec.start;
        s->g.assign(n, kInfinity);
        s->h.assign(n, 0.0);
        s->parent.assign(n, kNoEdge);
        s->state.assign(n, kUnreached);
        if (!spec.component_edges.empty()) {
            s->start_edge.assign(g_.edge_count(), 0);
            for (EdgeId e : spec.component_edges) s->start_edge[static_cast<std::size_t>(e)] = 1;
            s->start_vertex.assign(n, 0);
            spec.component_vertices.push_back(spec.start);
            for (VertexId v : spec.component_vertices) {
                if (!s->start_vertex[static_cast<std::size_t>(v)]) {
                    s->start_vertex[static_cast<std::size_t>(v)] = 1;
                    ++s->start_total;
                }
            }
            s->cost_future = false;
        } else {
            s->cost_future = true;
        }
        Source& src = *s;
        sources_.emplace(spec.id, std::move(s));
        if (opt_.astar) {
            for (const auto& [tid, t] : targets_) {
                if (eligible(src, t)) src.hlist.push_back(tid);
            }
        }
        touch_free(src, spec.start, 0.0, kNoEdge);
        update_top(src);
        dirty_ = true;
    }

    void retire_source(TerminalId id) {
        auto it = sources_.find(id);
        if (it == sources_.end()) throw ParameterError("retire of unknown source " + std::to_string(id));
        sources_.erase(it);
        dirty_ = true;
    }

    bool has_source(TerminalId id) const { return sources_.count(id) != 0; }

    void add_target(TargetSpec spec) {
        if (targets_.count(spec.id)) throw ParameterError("duplicate target id " + std::to_string(spec.id));
        if (!g_.valid_vertex(spec.position)) throw ParameterError("target position out of range");
        Target t;
        t.id = spec.id;
        t.weight = spec.weight;
        t.is_root = spec.is_root;
        t.position = spec.position;
        t.vertices = std::move(spec.component_vertices);
        t.vertices.push_back(spec.position);
        std::sort(t.vertices.begin(), t.vertices.end());
        t.vertices.erase(std::unique(t.vertices.begin(), t.vertices.end()), t.vertices.end());
        t.edges = std::move(spec.component_edges);
        std::sort(t.edges.begin(), t.edges.end());
        t.edges.erase(std::unique(t.edges.begin(), t.edges.end()), t.edges.end());
        if (!t.edges.empty() && opt_.future != nullptr) {
            double sum = 0.0;
            for (EdgeId e : t.edges) sum += g_.edge(e).cost;
            double worst = 0.0;
            for (VertexId z : t.vertices) worst = std::max(worst, opt_.future->cost_upper_bound(z, t.position));
            t.internal_cost_bound = std::min(sum, worst);
        }
        for (VertexId v : t.vertices) vertex_targets_[static_cast<std::size_t>(v)].push_back(t.id);
        for (EdgeId e : t.edges) edge_targets_[static_cast<std::size_t>(e)].push_back(t.id);
        const Target& tr = targets_.emplace(t.id, std::move(t)).first->second;

        for (auto& [sid, sp] : sources_) {
            Source& s = *sp;
            if (!eligible(s, tr)) continue;
            for (VertexId z : tr.vertices) {
                if (s.state[static_cast<std::size_t>(z)] == kPermanent) {
                    relax_tag(s, tr, z, s.g[static_cast<std::size_t>(z)], kNoEdge);
                }
            }
            if (opt_.astar) {
                s.hlist.push_back(tr.id);
                for (VertexId v : s.touched) {
                    const auto vi = static_cast<std::size_t>(v);
                    if (s.state[vi] != kOpen) continue;
                    const double nh = opt_.heuristic_scale * target_bound(s, tr, v);
                    if (nh < s.h[vi]) {
                        s.h[vi] = nh;
                        push(s, v, kFreeTag, s.g[vi], s.g[vi] + nh);
                    }
                }
            }
            update_top(s);
        }
        dirty_ = true;
    }

    void remove_target(TerminalId id) {
        auto it = targets_.find(id);
        if (it == targets_.end() || !it->second.alive) throw ParameterError("removal of unknown target " + std::to_string(id));
        Target& t = it->second;
        t.alive = false;
        for (VertexId v : t.vertices) std::erase(vertex_targets_[static_cast<std::size_t>(v)], id);
        for (EdgeId e : t.edges) std::erase(edge_targets_[static_cast<std::size_t>(e)], id);
        for (auto& [sid, sp] : sources_) {
            std::erase_if(sp->tags, [id](const auto& kv) { return static_cast<TerminalId>(kv.first >> 32) == id; });
        }
        dirty_ = true;
    }

    /// Advances the searches until the pair (source, target) minimizing
    /// distance + penalty is settled; ties by (value, source id, target
    /// vertex, target id).
    Hit advance_until_hit() {
        auto hit = try_advance();
        if (!hit) {
            std::string ids;
            for (const auto& [sid, sp] : sources_) ids += (ids.empty() ? "" : ",") + std::to_string(sid);
            throw ExhaustionError("search exhausted: no eligible target reachable from source(s) {" + ids + "}");
        }
        return *std::move(hit);
    }

    /// Like advance_until_hit but returns nullopt when every search is
    /// exhausted without a further hit.
    std::optional<Hit> try_advance() {
        if (dirty_) refresh_candidates();
        for (;;) {
            while (!candidates_.empty() && !candidate_valid(candidates_.top())) candidates_.pop();
            const double open = open_min_key();
            if (!candidates_.empty() && candidates_.top().value < open) {
                const Candidate c = candidates_.top();
                candidates_.pop();
                return make_hit(c);
            }
            if (open == kInfinity) return std::nullopt;
            process_one();
        }
    }

    /// Distance of a permanent free label, if any.
    std::optional<double> permanent_distance(TerminalId source, VertexId v) const {
        auto it = sources_.find(source);
        if (it == sources_.end()) return std::nullopt;
        const Source& s = *it->second;
        if (s.state[static_cast<std::size_t>(v)] != kPermanent) return std::nullopt;
        return s.g[static_cast<std::size_t>(v)];
    }

    /// Walk from the source start to `v` along permanent free labels.
    std::optional<std::vector<EdgeId>> permanent_path(TerminalId source, VertexId v) const {
        auto it = sources_.find(source);
        if (it == sources_.end()) return std::nullopt;
        const Source& s = *it->second;
        if (s.state[static_cast<std::size_t>(v)] != kPermanent) return std::nullopt;
        std::vector<EdgeId> walk;
        VertexId cur = v;
        while (s.parent[static_cast<std::size_t>(cur)] != kNoEdge) {
            const EdgeId e = s.parent[static_cast<std::size_t>(cur)];
            walk.push_back(e);
            cur = g_.edge(e).other(cur);
        }
        std::reverse(walk.begin(), walk.end());
        return walk;
    }

    /// Recomputes a hit value from its walk: start-component edges free of
    /// c-cost before the entry point, target-component edges (and only
    /// those) after it. Throws ValidationError if the tagged part leaves the
    /// target component.
    static double recompute_hit_value(const RoutingGraph& g, const Hit& hit,
                                      std::span<const EdgeId> start_edges,
                                      std::span<const EdgeId> target_edges) {
        auto contains = [](std::span<const EdgeId> set, EdgeId e) {
            return std::find(set.begin(), set.end(), e) != set.end();
        };
        double dist = 0.0;
        for (std::size_t i = 0; i < hit.walk.size(); ++i) {
            const EdgeId e = hit.walk[i];
            const GraphEdge& ge = g.edge(e);
            if (i < hit.entry_index) {
                dist += (contains(start_edges, e) ? 0.0 : ge.cost) + hit.source_weight * ge.delay;
            } else {
                if (!contains(target_edges, e)) {
                    throw ValidationError("tagged path uses edge " + std::to_string(e) + " outside its end component");
                }
                dist += hit.source_weight * ge.delay;
            }
        }
        return dist + hit.penalty;
    }

private:
    static constexpr std::uint8_t kUnreached = 0;
    static constexpr std::uint8_t kOpen = 1;
    static constexpr std::uint8_t kPermanent = 2;
    static constexpr TerminalId kFreeTag = -1;

    struct Target {
        TerminalId id = -1;
        double weight = 0.0;
        bool is_root = false;
        bool alive = true;
        VertexId position = kNoVertex;
        std::vector<VertexId> vertices;
        std::vector<EdgeId> edges;
        double internal_cost_bound = 0.0;
    };

    struct TagLabel {
        double g = kInfinity;
        double h = 0.0;
        EdgeId parent = kNoEdge;  // kNoEdge: entered from the free label here
        std::uint8_t state = kUnreached;
    };

    struct LocalEntry {
        double key;
        VertexId vertex;
        TerminalId tag;
        double g;
        bool operator>(const LocalEntry& o) const {
            if (key != o.key) return key > o.key;
            if (vertex != o.vertex) return vertex > o.vertex;
            return tag > o.tag;
        }
    };

    struct Source {
        TerminalId id = -1;
        double weight = 0.0;
        VertexId start = kNoVertex;
        std::vector<double> g;
        std::vector<double> h;
        std::vector<EdgeId> parent;
        std::vector<std::uint8_t> state;
        std::vector<VertexId> touched;
        std::vector<std::uint8_t> start_edge;
        std::vector<std::uint8_t> start_vertex;
        std::size_t start_total = 0;
        std::size_t start_permanent = 0;
        bool cost_future = true;
        std::unordered_map<std::uint64_t, TagLabel> tags;
        std::vector<TerminalId> hlist;
        std::vector<std::pair<TerminalId, double>> found;
        std::priority_queue<LocalEntry, std::vector<LocalEntry>, std::greater<>> heap;
        std::uint64_t version = 0;
    };

    struct TopEntry {
        double key;
        TerminalId source;
        std::uint64_t version;
        bool operator>(const TopEntry& o) const {
            if (key != o.key) return key > o.key;
            return source > o.source;
        }
    };

    struct GlobalEntry {
        double key;
        TerminalId source;
        VertexId vertex;
        TerminalId tag;
        double g;
        bool operator>(const GlobalEntry& o) const {
            if (key != o.key) return key > o.key;
            if (source != o.source) return source > o.source;
            if (vertex != o.vertex) return vertex > o.vertex;
            return tag > o.tag;
        }
    };

    struct Candidate {
        double value;
        TerminalId source;
        VertexId vertex;
        TerminalId target;
        double g;
        double penalty;
        bool operator>(const Candidate& o) const {
            if (value != o.value) return value > o.value;
            if (source != o.source) return source > o.source;
            if (vertex != o.vertex) return vertex > o.vertex;
            return target > o.target;
        }
    };

    static std::uint64_t tag_key(TerminalId t, VertexId v) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 32) | static_cast<std::uint32_t>(v);
    }

    bool eligible(const Source& s, const Target& t) const {
        return t.alive && t.id != s.id && (t.is_root || s.weight <= t.weight);
    }

    double edge_length(const Source& s, EdgeId e) const {
        const GraphEdge& ge = g_.edge(e);
        const double c = (!s.start_edge.empty() && s.start_edge[static_cast<std::size_t>(e)]) ? 0.0 : ge.cost;
        return c + s.weight * ge.delay;
    }

    double target_bound(const Source& s, const Target& t, VertexId v) const {
        double b = s.weight * opt_.future->delay_bound(v, t.position);
        if (s.cost_future) b += std::max(0.0, opt_.future->cost_bound(v, t.position) - t.internal_cost_bound);
        return b;
    }

    double heuristic(const Source& s, VertexId v) const {
        if (!opt_.astar || s.hlist.empty()) return 0.0;
        double best = kInfinity;
        for (TerminalId tid : s.hlist) best = std::min(best, target_bound(s, targets_.at(tid), v));
        return opt_.heuristic_scale * best;
    }

    double tag_heuristic(const Source& s, const Target& t, VertexId v) const {
        if (!opt_.astar) return 0.0;
        return opt_.heuristic_scale * s.weight * opt_.future->delay_bound(v, t.position);
    }

    void push(Source& s, VertexId v, TerminalId tag, double g, double key) {
        ++counters_.heap_pushes;
        if (opt_.two_level_heap) {
            s.heap.push({key, v, tag, g});
        } else {
            global_.push({key, s.id, v, tag, g});
        }
    }

    void touch_free(Source& s, VertexId v, double g, EdgeId parent) {
        const auto vi = static_cast<std::size_t>(v);
        s.g[vi] = g;
        s.parent[vi] = parent;
        if (s.state[vi] == kUnreached) {
            s.state[vi] = kOpen;
            s.touched.push_back(v);
            s.h[vi] = heuristic(s, v);
        }
        push(s, v, kFreeTag, g, g + s.h[vi]);
    }

    void relax_tag(Source& s, const Target& t, VertexId v, double g, EdgeId parent) {
        TagLabel& l = s.tags[tag_key(t.id, v)];
        if (l.state == kPermanent || !(g < l.g)) return;
        if (l.state == kUnreached) l.h = tag_heuristic(s, t, v);
        l.g = g;
        l.parent = parent;
        l.state = kOpen;
        push(s, v, t.id, g, g + l.h);
    }

    void rekey(Source& s) {
        ++counters_.rekeys;
        for (VertexId v : s.touched) {
            const auto vi = static_cast<std::size_t>(v);
            if (s.state[vi] != kOpen) continue;
            s.h[vi] = heuristic(s, v);
            push(s, v, kFreeTag, s.g[vi], s.g[vi] + s.h[vi]);
        }
    }

    bool entry_stale(const Source& s, VertexId v, TerminalId tag, double g, double key) const {
        if (tag == kFreeTag) {
            const auto vi = static_cast<std::size_t>(v);
            return s.state[vi] != kOpen || s.g[vi] != g || s.g[vi] + s.h[vi] != key;
        }
        auto it = s.tags.find(tag_key(tag, v));
        if (it == s.tags.end()) return true;
        const TagLabel& l = it->second;
        return l.state != kOpen || l.g != g || l.g + l.h != key;
    }

    void purge(Source& s) {
        while (!s.heap.empty()) {
            const LocalEntry& e = s.heap.top();
            if (!entry_stale(s, e.vertex, e.tag, e.g, e.key)) break;
            s.heap.pop();
            ++counters_.heap_pops;
        }
    }

    void update_top(Source& s) {
        if (!opt_.two_level_heap) return;
        purge(s);
        ++s.version;
        if (!s.heap.empty()) top_.push({s.heap.top().key, s.id, s.version});
    }

    double open_min_key() {
        if (opt_.two_level_heap) {
            while (!top_.empty()) {
                const TopEntry& t = top_.top();
                auto it = sources_.find(t.source);
                if (it != sources_.end() && it->second->version == t.version) return t.key;
                top_.pop();
            }
            return kInfinity;
        }
        while (!global_.empty()) {
            const GlobalEntry& e = global_.top();
            auto it = sources_.find(e.source);
            if (it != sources_.end() && !entry_stale(*it->second, e.vertex, e.tag, e.g, e.key)) return e.key;
            global_.pop();
            ++counters_.heap_pops;
        }
        return kInfinity;
    }

    void process_one() {
        Source* s = nullptr;
        LocalEntry e{};
        if (opt_.two_level_heap) {
            const TopEntry t = top_.top();
            top_.pop();
            s = sources_.at(t.source).get();
            e = s->heap.top();
            s->heap.pop();
        } else {
            const GlobalEntry ge = global_.top();
            global_.pop();
            s = sources_.at(ge.source).get();
            e = {ge.key, ge.vertex, ge.tag, ge.g};
        }
        ++counters_.heap_pops;
        if (!entry_stale(*s, e.vertex, e.tag, e.g, e.key)) {
            if (e.tag == kFreeTag) {
                settle_free(*s, e.vertex);
            } else {
                settle_tag(*s, e.tag, e.vertex);
            }
        }
        update_top(*s);
    }

    void settle_free(Source& s, VertexId v) {
        const auto vi = static_cast<std::size_t>(v);
        s.state[vi] = kPermanent;
        ++counters_.labels_scanned;
        const double g = s.g[vi];
        if (!s.start_vertex.empty() && s.start_vertex[vi]) {
            ++s.start_permanent;
            if (opt_.astar && !s.cost_future && s.start_permanent == s.start_total) {
                s.cost_future = true;
                rekey(s);
            }
        }
        for (TerminalId tid : vertex_targets_[vi]) {
            const Target& t = targets_.at(tid);
            if (eligible(s, t)) relax_tag(s, t, v, g, kNoEdge);
        }
        for (EdgeId e : g_.incident(v)) {
            const VertexId w = g_.edge(e).other(v);
            const auto wi = static_cast<std::size_t>(w);
            if (s.state[wi] == kPermanent) continue;
            const double ng = g + edge_length(s, e);
            if (ng < s.g[wi]) touch_free(s, w, ng, e);
        }
    }

    void settle_tag(Source& s, TerminalId tid, VertexId v) {
        TagLabel& l = s.tags.at(tag_key(tid, v));
        l.state = kPermanent;
        ++counters_.labels_scanned;
        const double g = l.g;
        const Target& t = targets_.at(tid);
        if (v == t.position) {
            s.found.emplace_back(tid, g);
            const double p = penalty_(s.id, tid);
            candidates_.push({g + p, s.id, v, tid, g, p});
            return;
        }
        for (EdgeId e : g_.incident(v)) {
            const auto& owners = edge_targets_[static_cast<std::size_t>(e)];
            if (std::find(owners.begin(), owners.end(), tid) == owners.end()) continue;
            const VertexId w = g_.edge(e).other(v);
            relax_tag(s, t, w, g + s.weight * g_.edge(e).delay, e);
        }
    }

    bool candidate_valid(const Candidate& c) const {
        if (!sources_.count(c.source)) return false;
        auto it = targets_.find(c.target);
        return it != targets_.end() && it->second.alive;
    }

    void refresh_candidates() {
        dirty_ = false;
        candidates_ = {};
        for (auto& [sid, sp] : sources_) {
            Source& s = *sp;
            std::erase_if(s.found, [this](const auto& f) { return !targets_.at(f.first).alive; });
            for (const auto& [tid, g] : s.found) {
                const double p = penalty_(s.id, tid);
                candidates_.push({g + p, s.id, targets_.at(tid).position, tid, g, p});
            }
            if (opt_.astar) {
                std::size_t dead = 0;
                for (TerminalId tid : s.hlist) dead += targets_.at(tid).alive ? 0 : 1;
                if (dead > 8 && 2 * dead > s.hlist.size()) {
                    std::erase_if(s.hlist, [this](TerminalId tid) { return !targets_.at(tid).alive; });
                    rekey(s);
                    update_top(s);
                }
            }
        }
    }

    Hit make_hit(const Candidate& c) const {
        const Source& s = *sources_.at(c.source);
        const Target& t = targets_.at(c.target);
        Hit hit;
        hit.source = c.source;
        hit.target = c.target;
        hit.target_is_root = t.is_root;
        hit.value = c.value;
        hit.distance = c.g;
        hit.penalty = c.penalty;
        hit.source_weight = s.weight;
        hit.target_vertex = t.position;

        std::vector<EdgeId> tagged;
        VertexId cur = t.position;
        for (;;) {
            const TagLabel& l = s.tags.at(tag_key(t.id, cur));
            if (l.parent == kNoEdge) break;
            tagged.push_back(l.parent);
            cur = g_.edge(l.parent).other(cur);
        }
        std::vector<EdgeId> free_part;
        while (s.parent[static_cast<std::size_t>(cur)] != kNoEdge) {
            const EdgeId e = s.parent[static_cast<std::size_t>(cur)];
            free_part.push_back(e);
            cur = g_.edge(e).other(cur);
        }
        std::reverse(free_part.begin(), free_part.end());
        std::reverse(tagged.begin(), tagged.end());
        hit.entry_index = free_part.size();
        hit.walk = std::move(free_part);
        hit.walk.insert(hit.walk.end(), tagged.begin(), tagged.end());
        return hit;
    }

    const RoutingGraph& g_;
    EngineOptions opt_;
    PenaltyFn penalty_;
    std::map<TerminalId, std::unique_ptr<Source>> sources_;
    std::map<TerminalId, Target> targets_;
    std::vector<std::vector<TerminalId>> vertex_targets_;
    std::vector<std::vector<TerminalId>> edge_targets_;
    std::priority_queue<TopEntry, std::vector<TopEntry>, std::greater<>> top_;
    std::priority_queue<GlobalEntry, std::vector<GlobalEntry>, std::greater<>> global_;
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> candidates_;
    EngineCounters counters_;
    bool dirty_ = false;
};

} // namespace cdst
