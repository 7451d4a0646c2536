#pragma once

#include <cdst/future_cost.hpp>
#include <cdst/graph.hpp>
#include <cdst/rng.hpp>
#include <cdst/search_engine.hpp>
#include <cdst/tree.hpp>
#include <cdst/tree_builder.hpp>

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cdst {

struct SolverConfig {
    bool discount_components = true;
    bool two_level_heap = true;
    bool astar = true;
    bool reposition_steiner = true;
    bool root_bonus = true;
    int landmark_count = 8;
    std::uint64_t rng_seed = 1;
    bool audit_hits = false;        // recompute every hit value from its walk
    double heuristic_scale = 1.0;   // >1 inflates the A* heuristic (negative control)

    static SolverConfig plain() {
        SolverConfig c;
        c.discount_components = c.two_level_heap = c.astar = c.reposition_steiner = c.root_bonus = false;
        return c;
    }
};

enum class TerminalOrigin { sink, steiner, root };

struct ActiveTerminal {
    TerminalId id = -1;
    VertexId position = kNoVertex;
    double weight = 0.0;
    TerminalOrigin origin = TerminalOrigin::sink;
};

/// Active terminals of one iteration in id order; exactly one has the root
/// origin.
struct ActiveSet {
    std::vector<ActiveTerminal> terminals;

    const ActiveTerminal* find(TerminalId id) const {
        for (const auto& t : terminals)
            if (t.id == id) return &t;
        return nullptr;
    }

    const ActiveTerminal& root() const {
        for (const auto& t : terminals)
            if (t.origin == TerminalOrigin::root) return t;
        throw ValidationError("active set without a root");
    }

    /// Total weight of the non-root terminals.
    double sink_weight() const {
        double s = 0.0;
        for (const auto& t : terminals)
            if (t.origin != TerminalOrigin::root) s += t.weight;
        return s;
    }
};

/// Root-merge penalty: beta against the weight of every other active
/// non-root terminal, less eta * d_bif * w(u) when the bonus is on.
inline double root_merge_penalty(double w_u, double remaining_weight, double d_bif, double eta, bool root_bonus) {
    double b = beta(w_u, remaining_weight, d_bif, eta);
    if (root_bonus) b -= eta * d_bif * w_u;
    return b;
}

/// Expected bifurcation penalty b(u, v) for merging active terminal `u`
/// with `v` (another terminal or the root).
inline double merge_penalty(const ActiveTerminal& u, const ActiveTerminal& v, const ActiveSet& active,
                            double d_bif, double eta, bool root_bonus) {
    if (u.origin == TerminalOrigin::root) throw ParameterError("merge penalty source must not be the root");
    if (active.find(u.id) == nullptr) throw ParameterError("terminal " + std::to_string(u.id) + " is not active");
    if (v.origin == TerminalOrigin::root) {
        double others = 0.0;
        for (const auto& t : active.terminals) {
            if (t.origin != TerminalOrigin::root && t.id != u.id) others += t.weight;
        }
        return root_merge_penalty(u.weight, others, d_bif, eta, root_bonus);
    }
    return beta(u.weight, v.weight, d_bif, eta);
}

struct TraceStep {
    int iteration = 0;
    TerminalId u = -1;
    TerminalId v = -1;
    bool root_merge = false;
    double value = 0.0;
    double distance = 0.0;
    double penalty = 0.0;
    VertexId target_vertex = kNoVertex;
    VertexId position = kNoVertex;  // position of the new terminal
    TerminalId created = -1;
    std::optional<ActiveSet> active_before;
};

struct SolveTrace {
    bool keep_snapshots = false;
    std::vector<TraceStep> steps;
    EngineCounters counters;
};

inline std::string format_trace(const SolveTrace& trace) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (const auto& s : trace.steps) {
        out << "iter=" << s.iteration << " u=" << s.u << " v=" << s.v << (s.root_merge ? " root" : " sink")
            << " L=" << s.value << " dist=" << s.distance << " penalty=" << s.penalty
            << " pos=" << s.position << " new=" << s.created << '\n';
    }
    return out.str();
}

namespace detail {

class CdSolver {
public:
    CdSolver(const RoutingGraph& g, const NetInstance& net, const SolverConfig& cfg, SolveTrace* trace)
        : g_(g), net_(net), cfg_(cfg), trace_(trace), rng_(cfg.rng_seed), builder_(g) {}

    EmbeddedTree run() {
        validate_instance(g_, net_);
        if (cfg_.astar || cfg_.reposition_steiner) {
            future_ = build_future_costs(g_, cfg_.landmark_count, cfg_.rng_seed);
        }
        EngineOptions eo;
        eo.two_level_heap = cfg_.two_level_heap;
        eo.astar = cfg_.astar;
        eo.future = future_ ? &*future_ : nullptr;
        eo.heuristic_scale = cfg_.heuristic_scale;
        engine_.emplace(g_, eo, [this](TerminalId s, TerminalId t) { return penalty(s, t); });

        const auto k = static_cast<TerminalId>(net_.sinks.size());
        root_node_ = builder_.add_node(NodeRole::root, net_.root);
        next_id_ = k;
        add_terminal({next_id_++, net_.root, 0.0, TerminalOrigin::root}, root_node_);
        for (TerminalId i = 0; i < k; ++i) {
            const Sink& s = net_.sinks[static_cast<std::size_t>(i)];
            const int node = builder_.add_node(NodeRole::sink, s.position, static_cast<int>(i), s.weight);
            add_terminal({i, s.position, s.weight, TerminalOrigin::sink}, node);
            original_weight_ += s.weight;
        }
        for (TerminalId i = 0; i < k; ++i) {
            const Term& t = active_.at(i);
            engine_->add_source(source_spec(t));
        }

        for (int it = 0; it < static_cast<int>(k); ++it) iterate(it);
        if (trace_) trace_->counters = engine_->counters();
        return builder_.finalize(net_, root_node_);
    }

private:
    struct Term {
        ActiveTerminal t;
        int node;  // attachment node (plain mode) or a node of the component
    };

    double penalty(TerminalId s, TerminalId t) const {
        const ActiveTerminal& u = active_.at(s).t;
        const ActiveTerminal& v = active_.at(t).t;
        if (v.origin == TerminalOrigin::root) {
            return root_merge_penalty(u.weight, active_weight_ - u.weight, net_.d_bif, net_.eta, cfg_.root_bonus);
        }
        return beta(u.weight, v.weight, net_.d_bif, net_.eta);
    }

    void add_terminal(ActiveTerminal t, int node) {
        if (t.origin != TerminalOrigin::root) active_weight_ += t.weight;
        active_.emplace(t.id, Term{t, node});
        engine_->add_target(target_spec(active_.at(t.id)));
    }

    void drop_terminal(TerminalId id) {
        const Term& t = active_.at(id);
        if (t.t.origin != TerminalOrigin::root) {
            active_weight_ -= t.t.weight;
            engine_->retire_source(id);
        }
        engine_->remove_target(id);
        active_.erase(id);
    }

    SourceSpec source_spec(const Term& t) const {
        SourceSpec s{t.t.id, t.t.weight, t.t.position, {}, {}};
        if (cfg_.discount_components) {
            s.component_vertices = builder_.component_vertices(t.node);
            s.component_edges = builder_.component_edges(t.node);
        }
        return s;
    }

    TargetSpec target_spec(const Term& t) const {
        TargetSpec s{t.t.id, t.t.weight, t.t.origin == TerminalOrigin::root, t.t.position, {}, {}};
        if (cfg_.discount_components) {
            s.component_vertices = builder_.component_vertices(t.node);
            s.component_edges = builder_.component_edges(t.node);
        }
        return s;
    }

    ActiveSet snapshot() const {
        ActiveSet a;
        for (const auto& [id, t] : active_) a.terminals.push_back(t.t);
        return a;
    }

    void audit(const Hit& h, const Term& u, const Term& v) const {
        std::vector<EdgeId> se;
        std::vector<EdgeId> te;
        if (cfg_.discount_components) {
            se = builder_.component_edges(u.node);
            te = builder_.component_edges(v.node);
        }
        if (walk_end(g_, u.t.position, h.walk) != v.t.position) {
            throw ValidationError("hit walk does not join its terminals");
        }
        const double value = SearchEngine::recompute_hit_value(g_, h, se, te);
        if (!relative_close(value, h.value, 1e-9)) {
            throw ValidationError("hit value " + std::to_string(h.value) + " differs from its walk " + std::to_string(value));
        }
    }

    /// Joins the components of `u` and `v` by the part of the hit walk
    /// between leaving u's component and first touching v's.
    std::pair<std::size_t, std::size_t> connect_components(const Hit& h, const Term& u, const Term& v,
                                                           const std::vector<VertexId>& verts) {
        std::vector<char> in_u(g_.vertex_count(), 0);
        std::vector<char> in_v(g_.vertex_count(), 0);
        for (VertexId x : builder_.component_vertices(u.node)) in_u[static_cast<std::size_t>(x)] = 1;
        for (VertexId x : builder_.component_vertices(v.node)) in_v[static_cast<std::size_t>(x)] = 1;
        std::size_t a = 0;
        for (std::size_t i = 0; i <= h.entry_index; ++i)
            if (in_u[static_cast<std::size_t>(verts[i])]) a = i;
        std::size_t b = a;
        while (!in_v[static_cast<std::size_t>(verts[b])]) ++b;
        const int na = builder_.node_at(u.node, verts[a]);
        const int nb = builder_.node_at(v.node, verts[b]);
        builder_.add_link(na, nb, std::vector<EdgeId>(h.walk.begin() + static_cast<std::ptrdiff_t>(a),
                                                      h.walk.begin() + static_cast<std::ptrdiff_t>(b)));
        return {a, b};
    }

    void iterate(int it) {
        TraceStep step;
        step.iteration = it;
        if (trace_ && trace_->keep_snapshots) step.active_before = snapshot();

        const Hit h = engine_->advance_until_hit();
        const Term u = active_.at(h.source);
        const Term v = active_.at(h.target);
        if (cfg_.audit_hits) audit(h, u, v);
        step.u = h.source;
        step.v = h.target;
        step.value = h.value;
        step.distance = h.distance;
        step.penalty = h.penalty;
        step.target_vertex = h.target_vertex;

        const auto verts = walk_vertices(g_, u.t.position, h.walk);
        if (v.t.origin == TerminalOrigin::root) {
            step.root_merge = true;
            int node = v.node;
            if (cfg_.discount_components) {
                connect_components(h, u, v, verts);
            } else {
                node = builder_.add_node(NodeRole::steiner, net_.root);
                builder_.add_link(u.node, node, h.walk);
                builder_.add_link(node, v.node, {});
            }
            drop_terminal(u.t.id);
            drop_terminal(v.t.id);
            root_connected_ += u.t.weight;
            const TerminalId id = next_id_++;
            add_terminal({id, net_.root, u.t.weight, TerminalOrigin::root}, node);
            step.created = id;
            step.position = net_.root;
        } else {
            const std::size_t k = h.walk.size();
            const double ws = u.t.weight + v.t.weight;
            const double draw = rng_.uniform();
            std::size_t idx = draw < u.t.weight / ws ? 0 : k;

            std::size_t lo = 0;
            std::size_t hi = k;
            if (cfg_.discount_components) {
                const auto [a, b] = connect_components(h, u, v, verts);
                lo = a;
                hi = b;
            }
            if (cfg_.reposition_steiner) idx = reposition(h, u, v, verts, idx, lo, hi);

            int node = u.node;
            if (!cfg_.discount_components) {
                node = builder_.add_node(NodeRole::steiner, verts[idx]);
                std::vector<EdgeId> first(h.walk.begin(), h.walk.begin() + static_cast<std::ptrdiff_t>(idx));
                std::vector<EdgeId> second(h.walk.begin() + static_cast<std::ptrdiff_t>(idx), h.walk.end());
                if (cfg_.reposition_steiner && idx < k) {
                    if (auto better = cheaper_tail(v, verts[idx], second)) second = std::move(*better);
                }
                builder_.add_link(u.node, node, std::move(first));
                builder_.add_link(node, v.node, std::move(second));
            }
            drop_terminal(u.t.id);
            drop_terminal(v.t.id);
            const TerminalId id = next_id_++;
            add_terminal({id, verts[idx], ws, TerminalOrigin::steiner}, node);
            engine_->add_source(source_spec(active_.at(id)));
            step.created = id;
            step.position = verts[idx];
        }
        check_weights();
        if (trace_) trace_->steps.push_back(std::move(step));
    }

    /// Index on the hit walk minimizing the estimated cost of continuing
    /// from there to the root with the merged weight, plus each side's
    /// weighted delay to it. Candidates: both ends and [lo, hi].
    std::size_t reposition(const Hit& h, const Term& u, const Term& v, const std::vector<VertexId>& verts,
                           std::size_t idx, std::size_t lo, std::size_t hi) const {
        const std::size_t k = h.walk.size();
        const double ws = u.t.weight + v.t.weight;
        std::vector<double> prefix(k + 1, 0.0);
        for (std::size_t i = 0; i < k; ++i) prefix[i + 1] = prefix[i] + g_.edge(h.walk[i]).delay;
        auto objective = [&](std::size_t i) {
            return future_->bound(verts[i], net_.root, ws) + u.t.weight * prefix[i] + v.t.weight * (prefix[k] - prefix[i]);
        };
        std::size_t best = idx;
        double best_value = objective(idx);
        auto consider = [&](std::size_t i) {
            const double val = objective(i);
            if (val < best_value) {
                best_value = val;
                best = i;
            }
        };
        consider(0);
        for (std::size_t i = lo; i <= hi; ++i) consider(i);
        consider(k);
        return best;
    }

    /// v's own permanent path to `z`, reversed, when it is cheaper for v
    /// than the tail of the hit walk.
    std::optional<std::vector<EdgeId>> cheaper_tail(const Term& v, VertexId z, const std::vector<EdgeId>& tail) const {
        const auto dist = engine_->permanent_distance(v.t.id, z);
        if (!dist) return std::nullopt;
        double current = 0.0;
        for (EdgeId e : tail) current += g_.edge(e).cost + v.t.weight * g_.edge(e).delay;
        if (!(*dist < current)) return std::nullopt;
        auto path = *engine_->permanent_path(v.t.id, z);
        std::reverse(path.begin(), path.end());
        return path;
    }

    void check_weights() const {
        double sum = 0.0;
        int roots = 0;
        for (const auto& [id, t] : active_) {
            if (t.t.origin == TerminalOrigin::root) {
                ++roots;
            } else {
                sum += t.t.weight;
            }
        }
        if (roots != 1) throw ValidationError("active set must contain exactly one root");
        const double expected = original_weight_ - root_connected_;
        if (std::abs(sum - expected) > 1e-9 * std::max(1.0, original_weight_)) {
            throw ValidationError("active weight not conserved");
        }
    }

    const RoutingGraph& g_;
    const NetInstance& net_;
    SolverConfig cfg_;
    SolveTrace* trace_;
    Rng rng_;
    ForestBuilder builder_;
    std::optional<FutureCostTables> future_;
    std::optional<SearchEngine> engine_;
    std::map<TerminalId, Term> active_;
    TerminalId next_id_ = 0;
    int root_node_ = -1;
    double active_weight_ = 0.0;
    double original_weight_ = 0.0;
    double root_connected_ = 0.0;
};

} // namespace detail

/// Builds a cost-distance Steiner tree by repeatedly merging the active pair
/// (or terminal and root) with the smallest distance-plus-penalty.
inline EmbeddedTree solve(const RoutingGraph& g, const NetInstance& net, const SolverConfig& cfg,
                          SolveTrace* trace = nullptr) {
    detail::CdSolver solver(g, net, cfg, trace);
    return solver.run();
}

struct ExpectedCost {
    double mean = 0.0;
    double max = 0.0;
    double min = 0.0;
    int trials = 0;
};

/// Runs solve with seeds rng_seed .. rng_seed + trials - 1.
inline ExpectedCost solve_expected(const RoutingGraph& g, const NetInstance& net, SolverConfig cfg, int trials) {
    if (trials < 1) throw ParameterError("trials must be >= 1");
    ExpectedCost out;
    out.trials = trials;
    const std::uint64_t base = cfg.rng_seed;
    for (int i = 0; i < trials; ++i) {
        cfg.rng_seed = base + static_cast<std::uint64_t>(i);
        const double c = evaluate_cost(g, net, solve(g, net, cfg)).total;
        out.mean += (c - out.mean) / (i + 1);  // running mean; exact when all trials agree
        out.max = i == 0 ? c : std::max(out.max, c);
        out.min = i == 0 ? c : std::min(out.min, c);
    }
    return out;
}

} // namespace cdst
