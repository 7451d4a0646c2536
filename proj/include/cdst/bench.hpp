#pragma once

#include <cdst/baselines.hpp>
#include <cdst/cd_solver.hpp>
#include <cdst/embedding.hpp>
#include <cdst/generator.hpp>
#include <cdst/instance_io.hpp>
#include <cdst/oracle.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace cdst::bench {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kViolation = 3 };

/// Options shared by every subcommand.
struct GlobalOptions {
    std::uint64_t seed = 1;
    std::optional<double> eta;
    std::optional<double> d_bif;
    std::string enhancements = "all";
    std::string algo = "cd";
    double epsilon = 0.1;
    double gamma = 0.5;
    std::string out;
    int threads = 1;
};

/// Solver flags from "all", "none" or a comma list of discount, heap2,
/// astar, reposition, rootbonus.
inline SolverConfig parse_enhancements(const std::string& spec) {
    if (spec == "all") return SolverConfig{};
    SolverConfig c = SolverConfig::plain();
    if (spec == "none" || spec.empty()) return c;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "discount") c.discount_components = true;
        else if (item == "heap2") c.two_level_heap = true;
        else if (item == "astar") c.astar = true;
        else if (item == "reposition") c.reposition_steiner = true;
        else if (item == "rootbonus") c.root_bonus = true;
        else throw ParameterError("unknown enhancement '" + item + "'");
    }
    return c;
}

struct GridDims {
    int width = 0;
    int height = 0;
    int layers = 0;
};

inline GridDims parse_grid(const std::string& s) {
    GridDims d;
    char x1 = 0;
    char x2 = 0;
    std::istringstream in(s);
    if (!(in >> d.width >> x1 >> d.height >> x2 >> d.layers) || x1 != 'x' || x2 != 'x' || in.peek() != EOF) {
        throw ParameterError("grid must look like WxHxL, got '" + s + "'");
    }
    return d;
}

inline std::string to_string(const GridDims& d) {
    return std::to_string(d.width) + "x" + std::to_string(d.height) + "x" + std::to_string(d.layers);
}

/// Sink count "K" or inclusive range "A-B".
inline std::pair<int, int> parse_sink_range(const std::string& s) {
    int a = 0;
    int b = 0;
    char dash = 0;
    std::istringstream in(s);
    if (!(in >> a)) throw ParameterError("bad sink count '" + s + "'");
    b = a;
    if (in.peek() == '-') {
        in >> dash;
        if (!(in >> b)) throw ParameterError("bad sink range '" + s + "'");
    }
    if (in.peek() != EOF) throw ParameterError("bad sink count '" + s + "'");
    if (a < 1 || b < a) throw ParameterError("sink count must be >= 1, got '" + s + "'");
    return {a, b};
}

/// Fixed-format number: shortest round-trip is locale- and libc-dependent,
/// so 12 significant digits are printed instead.
inline std::string num(double v) {
    std::ostringstream o;
    o << std::setprecision(12) << v;
    return o.str();
}

inline std::string pct(double v) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << v;
    return o.str();
}

/// Runs f(i) for i in [0, n) on `threads` workers. Work is claimed through
/// an atomic counter; if any call throws, the exception of the lowest index
/// is rethrown after all workers have joined.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto count = static_cast<std::size_t>(std::max(1, threads));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(count, n); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// An instance failure annotated with its corpus id.
class InstanceError : public Error {
public:
    InstanceError(int id, const std::string& what, int code)
        : Error("instance " + std::to_string(id) + ": " + what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

struct CorpusEntry {
    int id = 0;
    std::string file;
    std::uint64_t seed = 0;
    int sinks = 0;
    std::string grid;
};

inline constexpr const char* kManifestName = "manifest.csv";
inline constexpr const char* kManifestHeader = "id,file,seed,sinks,grid";

inline std::vector<CorpusEntry> read_manifest(const std::string& dir) {
    const auto path = std::filesystem::path(dir) / kManifestName;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus manifest '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kManifestHeader) throw ParseError(path.string() + ": bad header");
    std::vector<CorpusEntry> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (auto& x : f)
            if (!std::getline(ss, x, ',')) throw ParseError(path.string() + ": malformed row '" + line + "'");
        try {
            out.push_back({std::stoi(f[0]), f[1], std::stoull(f[2]), std::stoi(f[3]), f[4]});
        } catch (const std::exception&) {
            throw ParseError(path.string() + ": malformed row '" + line + "'");
        }
    }
    return out;
}

struct LoadedInstance {
    int id = 0;
    RoutingGraph graph;
    NetInstance net;
};

/// Reads every corpus instance, applying --eta and --dbif overrides.
inline std::vector<LoadedInstance> load_corpus(const std::string& dir, const GlobalOptions& opt) {
    const auto entries = read_manifest(dir);
    std::vector<std::optional<LoadedInstance>> slots(entries.size());
    parallel_for(entries.size(), opt.threads, [&](std::size_t i) {
        auto [g, net] = read_instance((std::filesystem::path(dir) / entries[i].file).string());
        if (opt.eta) net.eta = *opt.eta;
        if (opt.d_bif) net.d_bif = *opt.d_bif;
        validate_instance(g, net);
        slots[i] = LoadedInstance{entries[i].id, std::move(g), std::move(net)};
    });
    std::vector<LoadedInstance> out;
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

inline constexpr std::array<const char*, 4> kCompared{"L1", "SL", "PD", "CD"};

/// Tree for one algorithm name: cd, l1, sl, pd or oracle.
inline EmbeddedTree run_algorithm(const std::string& algo, const RoutingGraph& g, const NetInstance& net,
                                  const GlobalOptions& opt, SolveTrace* trace = nullptr, Topology* topo = nullptr) {
    if (algo == "cd" || algo == "CD") {
        SolverConfig cfg = parse_enhancements(opt.enhancements);
        cfg.rng_seed = opt.seed;
        return solve(g, net, cfg, trace);
    }
    if (algo == "oracle") return exact_opt(g, net).tree;
    Topology t;
    if (algo == "l1" || algo == "L1") t = l1_topology(g, net);
    else if (algo == "sl" || algo == "SL") t = shallow_light_topology(g, net, opt.epsilon);
    else if (algo == "pd" || algo == "PD") t = prim_dijkstra_topology(g, net, opt.gamma);
    else throw ParameterError("unknown algorithm '" + algo + "'");
    if (topo) *topo = t;
    return embed_topology_optimal(g, net, t);
}

/// Objective of an algorithm's tree, always recomputed from the tree.
inline double objective(const std::string& algo, const RoutingGraph& g, const NetInstance& net, const GlobalOptions& opt) {
    const EmbeddedTree t = run_algorithm(algo, g, net, opt);
    validate_tree(g, net, t);
    return evaluate_cost(g, net, t).total;
}

struct InstanceComparison {
    int id = 0;
    std::size_t sinks = 0;
    std::array<double, 4> cost{};  // L1, SL, PD, CD
    double best = 0.0;

    double increase(std::size_t a) const { return best > 0.0 ? 100.0 * (cost[a] - best) / best : 0.0; }
};

inline std::vector<InstanceComparison> compare_instances(const std::vector<LoadedInstance>& corpus, const GlobalOptions& opt) {
    std::vector<InstanceComparison> rows(corpus.size());
    parallel_for(corpus.size(), opt.threads, [&](std::size_t i) {
        const LoadedInstance& inst = corpus[i];
        InstanceComparison r;
        r.id = inst.id;
        r.sinks = inst.net.sinks.size();
        for (std::size_t a = 0; a < kCompared.size(); ++a) {
            try {
                r.cost[a] = objective(kCompared[a], inst.graph, inst.net, opt);
            } catch (const Error& e) {
                throw InstanceError(inst.id, std::string(kCompared[a]) + " failed: " + e.what(), kViolation);
            }
        }
        r.best = *std::min_element(r.cost.begin(), r.cost.end());
        rows[i] = r;
    });
    return rows;
}

struct Bucket {
    const char* name;
    std::size_t lo;
    std::size_t hi;
};

inline constexpr std::array<Bucket, 4> kBuckets{{{"3-5", 3, 5}, {"6-14", 6, 14}, {"15-29", 15, 29}, {">=30", 30, SIZE_MAX}}};

struct BucketMean {
    std::string name;
    std::size_t count = 0;
    std::array<double, 4> mean{};  // mean % increase, L1, SL, PD, CD
};

/// Mean relative increase per size bucket and over all instances; empty
/// buckets report zeros.
inline std::vector<BucketMean> aggregate(const std::vector<InstanceComparison>& rows) {
    std::vector<BucketMean> out;
    auto collect = [&](const std::string& name, std::size_t lo, std::size_t hi) {
        BucketMean b;
        b.name = name;
        for (const auto& r : rows) {
            if (r.sinks < lo || r.sinks > hi) continue;
            ++b.count;
            for (std::size_t a = 0; a < 4; ++a) b.mean[a] += r.increase(a);
        }
        if (b.count > 0)
            for (auto& m : b.mean) m /= static_cast<double>(b.count);
        out.push_back(b);
    };
    for (const Bucket& b : kBuckets) collect(b.name, b.lo, b.hi);
    collect("all", 0, SIZE_MAX);
    return out;
}

inline std::string comparison_csv(const std::vector<InstanceComparison>& rows, bool per_instance) {
    std::ostringstream o;
    o << "bucket,count,L1,SL,PD,CD\n";
    for (const auto& b : aggregate(rows)) {
        o << b.name << ',' << b.count;
        for (double m : b.mean) o << ',' << pct(m);
        o << '\n';
    }
    if (per_instance) {
        o << "\ninstance,sinks,best,L1,SL,PD,CD\n";
        for (const auto& r : rows) {
            o << r.id << ',' << r.sinks << ',' << num(r.best);
            for (std::size_t a = 0; a < 4; ++a) o << ',' << pct(r.increase(a));
            o << '\n';
        }
    }
    return o.str();
}

struct Violation {
    int id = 0;
    std::string suite;
    std::string detail;
};

inline constexpr std::array<const char*, 5> kSuites{"pair-minimality", "oracle-ratio", "astar-neutrality",
                                                    "heap-transparency", "embedding-optimality"};

struct VerifyOptions {
    double heuristic_scale = 1.0;  // >1 inflates the A* heuristic
    std::size_t pair_limit = 8;
    std::size_t oracle_limit = kOracleMaxSinks;
};

/// 2 * ceil(log_{4/3} t); a single sink is solved exactly.
inline double approximation_factor(std::size_t t) {
    if (t <= 1) return 1.0;
    return 2.0 * std::ceil(std::log(static_cast<double>(t)) / std::log(4.0 / 3.0));
}

/// Invariant suites on one instance; returns the violations and, per suite,
/// whether it applied.
inline std::vector<Violation> verify_instance(const LoadedInstance& inst, const GlobalOptions& opt, const VerifyOptions& vo,
                                              std::array<bool, 5>* applied = nullptr) {
    std::vector<Violation> out;
    const auto& g = inst.graph;
    const auto& net = inst.net;
    const std::size_t t = net.sinks.size();
    auto fail = [&](int suite, const std::string& what) { out.push_back({inst.id, kSuites[static_cast<std::size_t>(suite)], what}); };
    std::array<bool, 5> used{};

    SolverConfig plain = SolverConfig::plain();
    plain.rng_seed = opt.seed;
    SolveTrace base;
    base.keep_snapshots = t <= vo.pair_limit;
    const EmbeddedTree base_tree = solve(g, net, plain, &base);

    if (t <= vo.pair_limit) {
        used[0] = true;
        for (const auto& step : base.steps) {
            const auto ref = pairwise_L_reference(g, *step.active_before, net.d_bif, net.eta);
            if (!is_reference_choice(ref, step.u, step.v, step.value, 1e-9)) {
                fail(0, "iteration " + std::to_string(step.iteration) + " chose (" + std::to_string(step.u) + "," +
                            std::to_string(step.v) + ") L=" + num(step.value));
                break;
            }
        }
    }

    if (t <= vo.oracle_limit) {
        used[1] = true;
        const double opt_value = exact_opt(g, net).value;
        for (const char* algo : {"cd", "l1", "sl", "pd"}) {
            const double c = objective(algo, g, net, opt);
            if (c < opt_value * (1 - 1e-9)) fail(1, std::string(algo) + " below OPT: " + num(c) + " < " + num(opt_value));
        }
        const double plain_cost = evaluate_cost(g, net, base_tree).total;
        if (plain_cost < opt_value * (1 - 1e-9) || plain_cost > approximation_factor(t) * opt_value * (1 + 1e-9)) {
            fail(1, "plain ratio " + num(plain_cost / opt_value) + " outside [1, " + num(approximation_factor(t)) + "]");
        }
    }

    {
        used[2] = true;
        SolverConfig astar = plain;
        astar.astar = true;
        astar.heuristic_scale = vo.heuristic_scale;
        SolveTrace tr;
        solve(g, net, astar, &tr);
        for (std::size_t i = 0; i < base.steps.size(); ++i) {
            if (i >= tr.steps.size() || !relative_close(tr.steps[i].value, base.steps[i].value, 1e-9)) {
                fail(2, "iteration " + std::to_string(i) + " value " + num(i < tr.steps.size() ? tr.steps[i].value : kInfinity) +
                            " != " + num(base.steps[i].value));
                break;
            }
        }
    }

    {
        used[3] = true;
        SolverConfig heap = plain;
        heap.two_level_heap = true;
        SolveTrace tr;
        solve(g, net, heap, &tr);
        if (format_trace(tr) != format_trace(base)) fail(3, "two-level heap changed the merge sequence");
    }

    {
        used[4] = true;
        for (const char* algo : {"l1", "sl", "pd"}) {
            Topology topo;
            run_algorithm(algo, g, net, opt, nullptr, &topo);
            double dp = 0.0;
            const EmbeddedTree tree = embed_topology_optimal(g, net, topo, &dp);
            validate_tree(g, net, tree);
            const double c = evaluate_cost(g, net, tree).total;
            if (!relative_close(c, dp, 1e-9)) fail(4, std::string(algo) + " embedding " + num(c) + " != DP " + num(dp));
        }
    }
    if (applied) *applied = used;
    return out;
}

struct VerifyReport {
    std::vector<Violation> violations;
    std::array<std::size_t, 5> checked{};
};

inline VerifyReport verify_corpus(const std::vector<LoadedInstance>& corpus, const GlobalOptions& opt, const VerifyOptions& vo) {
    std::vector<std::vector<Violation>> per(corpus.size());
    std::vector<std::array<bool, 5>> used(corpus.size());
    parallel_for(corpus.size(), opt.threads, [&](std::size_t i) {
        try {
            per[i] = verify_instance(corpus[i], opt, vo, &used[i]);
        } catch (const Error& e) {
            per[i] = {{corpus[i].id, "structure", e.what()}};
        }
    });
    VerifyReport r;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t s = 0; s < 5; ++s) r.checked[s] += used[i][s];
        for (auto& v : per[i]) r.violations.push_back(std::move(v));
    }
    return r;
}

inline std::string verify_text(const VerifyReport& r) {
    std::ostringstream o;
    o << "suite,instances,violations\n";
    for (std::size_t s = 0; s < kSuites.size(); ++s) {
        std::size_t n = 0;
        for (const auto& v : r.violations) n += v.suite == kSuites[s];
        o << kSuites[s] << ',' << r.checked[s] << ',' << n << '\n';
    }
    for (const auto& v : r.violations) o << "VIOLATION instance=" << v.id << " invariant=" << v.suite << " " << v.detail << '\n';
    o << (r.violations.empty() ? "OK\n" : "FAILED\n");
    return o.str();
}

struct ScalePoint {
    int t = 0;
    EngineCounters counters;
    double wall_ms = 0.0;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double nn = static_cast<double>(n);
    return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

/// Solves one net per sink count on a fixed grid. The generator draws the
/// hotspots before the terminals, so every t shares the graph and the
/// smaller terminal sets are prefixes of the larger ones.
inline std::vector<ScalePoint> run_scale(const GridDims& dims, const std::vector<int>& ts, const GlobalOptions& opt) {
    std::vector<ScalePoint> out(ts.size());
    parallel_for(ts.size(), opt.threads, [&](std::size_t i) {
        GridSpec s;
        s.seed = opt.seed;
        s.width = dims.width;
        s.height = dims.height;
        s.layers = dims.layers;
        s.wire_types = 2;
        s.sink_count = ts[i];
        s.congestion = CongestionProfile::hotspots;
        s.weights = WeightProfile::lognormal;
        s.d_bif = opt.d_bif.value_or(0.0);
        s.eta = opt.eta.value_or(0.5);
        const auto inst = generate_grid_instance(s);
        SolverConfig cfg = parse_enhancements(opt.enhancements);
        cfg.rng_seed = opt.seed;
        SolveTrace trace;
        const auto t0 = std::chrono::steady_clock::now();
        solve(inst.graph, inst.net, cfg, &trace);
        const auto t1 = std::chrono::steady_clock::now();
        out[i] = {ts[i], trace.counters, std::chrono::duration<double, std::milli>(t1 - t0).count()};
    });
    return out;
}

inline std::string scale_csv(const std::vector<ScalePoint>& pts, bool timing) {
    std::ostringstream o;
    o << "t,labels_scanned,heap_pushes,heap_pops" << (timing ? ",wall_ms" : "") << '\n';
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : pts) {
        o << p.t << ',' << p.counters.labels_scanned << ',' << p.counters.heap_pushes << ',' << p.counters.heap_pops;
        if (timing) o << ',' << pct(p.wall_ms);
        o << '\n';
        x.push_back(p.t);
        y.push_back(static_cast<double>(p.counters.labels_scanned));
    }
    if (pts.size() >= 2) o << "slope," << std::fixed << std::setprecision(4) << loglog_slope(x, y) << '\n';
    return o.str();
}

inline std::string tree_summary(const std::string& algo, const CostBreakdown& c) {
    return "algo,total,connection,weighted_delay,bifurcation\n" + algo + "," + num(c.total) + "," + num(c.connection_cost) + "," +
           num(c.weighted_wire_delay) + "," + num(c.weighted_bif_penalty) + "\n";
}

namespace detail {

inline void emit(const GlobalOptions& opt, const std::string& text, std::ostream& out) {
    if (opt.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw Error("cannot open '" + opt.out + "' for writing");
    f << text;
    if (!f) throw Error("write to '" + opt.out + "' failed");
}

inline int error_code(const std::exception& e) {
    if (auto* ie = dynamic_cast<const InstanceError*>(&e)) return ie->code();
    if (dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const SizeError*>(&e)) return kUsage;
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ExhaustionError*>(&e)) return kViolation;
    return kIo;  // parse and I/O failures
}

} // namespace detail

/// Command-line entry point: gen, solve, compare, verify, oracle, scale.
/// Exit codes: 0 success, 1 usage, 2 I/O or parse, 3 invariant violation.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cost-distance Steiner tree benchmark"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    double eta = 0.5;
    double dbif = 0.0;
    auto* eta_opt = app.add_option("--eta", eta, "bifurcation split parameter in [0, 1/2]");
    auto* dbif_opt = app.add_option("--dbif", dbif, "bifurcation delay d_bif >= 0");
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--enhancements", g.enhancements, "discount,heap2,astar,reposition,rootbonus | all | none");
    app.add_option("--algo", g.algo, "cd | l1 | sl | pd | oracle");
    app.add_option("--epsilon", g.epsilon, "shallow-light slack (> 0)");
    app.add_option("--gamma", g.gamma, "Prim-Dijkstra tradeoff in [0, 1]");
    app.add_option("--out", g.out, "output file (gen: corpus directory)");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen", "write a seeded corpus and its manifest");
    int count = 10;
    std::string sinks = "3";
    std::string grid = "6x6x2";
    int wire_types = 2;
    std::string congestion = "hotspots";
    std::string weights = "lognormal";
    gen->add_option("--count", count, "number of instances")->check(CLI::PositiveNumber);
    gen->add_option("--sinks", sinks, "sink count K or range A-B");
    gen->add_option("--grid", grid, "WxHxL");
    gen->add_option("--wire-types", wire_types, "parallel wire types per planar edge");
    gen->add_option("--congestion", congestion)->check(CLI::IsMember({"uniform", "hotspots"}));
    gen->add_option("--weights", weights)->check(CLI::IsMember({"unit", "lognormal"}));

    auto* solve_cmd = app.add_subcommand("solve", "run one algorithm on one instance");
    std::string instance;
    bool dump_topology = false;
    bool trace = false;
    solve_cmd->add_option("--instance", instance, "instance file")->required();
    solve_cmd->add_flag("--dump-topology", dump_topology, "print the planar topology (l1, sl, pd)");
    solve_cmd->add_flag("--trace", trace, "print the per-iteration merge trace (cd)");

    auto* compare = app.add_subcommand("compare", "compare CD, L1, SL and PD over a corpus");
    std::string corpus;
    bool per_instance = false;
    compare->add_option("--corpus", corpus, "corpus directory")->required();
    compare->add_flag("--per-instance", per_instance, "append per-instance rows");

    auto* verify = app.add_subcommand("verify", "run the invariant suites over a corpus");
    VerifyOptions vo;
    verify->add_option("--corpus", corpus, "corpus directory")->required();
    verify->add_option("--inflate-heuristic", vo.heuristic_scale, "A* heuristic multiplier (negative control)");

    auto* oracle = app.add_subcommand("oracle", "exact optimum for tiny instances");
    oracle->add_option("--instance", instance, "instance file");
    oracle->add_option("--corpus", corpus, "corpus directory");

    auto* scale = app.add_subcommand("scale", "label-count scaling over sink counts");
    std::string scale_grid = "64x64x4";
    std::vector<int> ts{10, 20, 40, 80, 160};
    bool timing = false;
    scale->add_option("--grid", scale_grid, "WxHxL");
    scale->add_option("--ts", ts, "sink counts")->delimiter(',')->check(CLI::PositiveNumber);
    scale->add_flag("--timing", timing, "add wall-clock milliseconds (not reproducible)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    if (eta_opt->count() > 0) g.eta = eta;
    if (dbif_opt->count() > 0) g.d_bif = dbif;

    try {
        if (g.eta && !(*g.eta >= 0.0 && *g.eta <= 0.5)) throw ParameterError("--eta out of [0, 1/2]");
        if (g.d_bif && !(*g.d_bif >= 0.0)) throw ParameterError("--dbif must be >= 0");
        if (!(g.epsilon > 0.0)) throw ParameterError("--epsilon must be > 0");
        if (!(g.gamma >= 0.0 && g.gamma <= 1.0)) throw ParameterError("--gamma out of [0, 1]");
        parse_enhancements(g.enhancements);

        if (gen->parsed()) {
            if (g.out.empty()) throw ParameterError("gen requires --out <directory>");
            const auto range = parse_sink_range(sinks);
            const GridDims dims = parse_grid(grid);
            std::filesystem::create_directories(g.out);
            std::vector<CorpusEntry> entries(static_cast<std::size_t>(count));
            parallel_for(entries.size(), g.threads, [&](std::size_t i) {
                GridSpec s;
                s.seed = mix_seed(g.seed, i);
                s.width = dims.width;
                s.height = dims.height;
                s.layers = dims.layers;
                s.wire_types = wire_types;
                s.sink_count = range.first + static_cast<int>(i % static_cast<std::size_t>(range.second - range.first + 1));
                s.congestion = congestion == "uniform" ? CongestionProfile::uniform : CongestionProfile::hotspots;
                s.weights = weights == "unit" ? WeightProfile::unit : WeightProfile::lognormal;
                s.d_bif = g.d_bif.value_or(0.0);
                s.eta = g.eta.value_or(0.5);
                const auto inst = generate_grid_instance(s);
                std::ostringstream name;
                name << "inst_" << std::setw(5) << std::setfill('0') << i << ".json";
                write_instance(inst.graph, inst.net, (std::filesystem::path(g.out) / name.str()).string());
                entries[i] = {static_cast<int>(i), name.str(), s.seed, s.sink_count, to_string(dims)};
            });
            std::ofstream m(std::filesystem::path(g.out) / kManifestName, std::ios::binary);
            if (!m) throw Error("cannot write manifest in '" + g.out + "'");
            m << kManifestHeader << '\n';
            for (const auto& e : entries) m << e.id << ',' << e.file << ',' << e.seed << ',' << e.sinks << ',' << e.grid << '\n';
            if (!m) throw Error("manifest write failed");
            out << "wrote " << count << " instances to " << g.out << '\n';
            return kOk;
        }

        if (solve_cmd->parsed()) {
            auto [graph, net] = read_instance(instance);
            if (g.eta) net.eta = *g.eta;
            if (g.d_bif) net.d_bif = *g.d_bif;
            validate_instance(graph, net);
            SolveTrace tr;
            Topology topo;
            const EmbeddedTree tree = run_algorithm(g.algo, graph, net, g, &tr, &topo);
            validate_tree(graph, net, tree);
            std::string text = tree_summary(g.algo, evaluate_cost(graph, net, tree));
            if (trace && (g.algo == "cd" || g.algo == "CD")) text += format_trace(tr);
            if (dump_topology && !topo.nodes.empty()) text += topology_to_string(topo);
            detail::emit(g, text, out);
            return kOk;
        }

        if (compare->parsed()) {
            const auto loaded = load_corpus(corpus, g);
            detail::emit(g, comparison_csv(compare_instances(loaded, g), per_instance), out);
            return kOk;
        }

        if (verify->parsed()) {
            const auto loaded = load_corpus(corpus, g);
            const auto report = verify_corpus(loaded, g, vo);
            detail::emit(g, verify_text(report), out);
            return report.violations.empty() ? kOk : kViolation;
        }

        if (oracle->parsed()) {
            if (instance.empty() == corpus.empty()) throw ParameterError("oracle needs exactly one of --instance or --corpus");
            std::vector<LoadedInstance> loaded;
            if (!instance.empty()) {
                auto [graph, net] = read_instance(instance);
                if (g.eta) net.eta = *g.eta;
                if (g.d_bif) net.d_bif = *g.d_bif;
                loaded.push_back({0, std::move(graph), std::move(net)});
            } else {
                loaded = load_corpus(corpus, g);
            }
            std::vector<std::string> rows(loaded.size());
            parallel_for(loaded.size(), g.threads, [&](std::size_t i) {
                const auto& inst = loaded[i];
                OracleResult r;
                try {
                    r = exact_opt(inst.graph, inst.net);
                } catch (const SizeError& e) {
                    throw InstanceError(inst.id, e.what(), kUsage);
                }
                const double cd = objective("cd", inst.graph, inst.net, g);
                rows[i] = std::to_string(inst.id) + "," + std::to_string(inst.net.sinks.size()) + "," + num(r.value) + "," + num(cd) +
                          "," + num(r.value > 0 ? cd / r.value : 1.0) + "," + std::to_string(r.topology_index) + "\n";
            });
            std::string text = "instance,sinks,opt,cd,ratio,topology\n";
            for (const auto& r : rows) text += r;
            detail::emit(g, text, out);
            return kOk;
        }

        if (scale->parsed()) {
            detail::emit(g, scale_csv(run_scale(parse_grid(scale_grid), ts, g), timing), out);
            return kOk;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return detail::error_code(e);
    }
    return kUsage;
}

} // namespace cdst::bench
