#include <cdst/bench.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace cdst;
using namespace cdst::bench;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "cdst_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("cdst_bench_" + name);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST(Parse, Enhancements) {
    const SolverConfig all = parse_enhancements("all");
    EXPECT_TRUE(all.discount_components && all.two_level_heap && all.astar && all.reposition_steiner && all.root_bonus);
    const SolverConfig none = parse_enhancements("none");
    EXPECT_FALSE(none.discount_components || none.two_level_heap || none.astar || none.reposition_steiner || none.root_bonus);
    const SolverConfig some = parse_enhancements("astar,heap2");
    EXPECT_TRUE(some.astar && some.two_level_heap);
    EXPECT_FALSE(some.discount_components || some.reposition_steiner || some.root_bonus);
    EXPECT_THROW(parse_enhancements("astar,warp"), ParameterError);
}

TEST(Parse, GridAndSinks) {
    const GridDims d = parse_grid("64x32x4");
    EXPECT_EQ(d.width, 64);
    EXPECT_EQ(d.height, 32);
    EXPECT_EQ(d.layers, 4);
    EXPECT_THROW(parse_grid("64x32"), ParameterError);
    EXPECT_THROW(parse_grid("4x4x2x"), ParameterError);
    EXPECT_EQ(parse_sink_range("7"), std::make_pair(7, 7));
    EXPECT_EQ(parse_sink_range("3-5"), std::make_pair(3, 5));
    EXPECT_THROW(parse_sink_range("0"), ParameterError);
    EXPECT_THROW(parse_sink_range("5-3"), ParameterError);
}

TEST(ParallelFor, CoversEveryIndexAndRethrowsLowest) {
    std::vector<int> hit(100, 0);
    parallel_for(hit.size(), 8, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) EXPECT_EQ(h, 1);
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 17 || i == 40) throw ParameterError(std::to_string(i));
        });
        FAIL() << "expected a throw";
    } catch (const ParameterError& e) {
        EXPECT_STREQ(e.what(), "17");
    }
}

TEST(Slope, RecoversPowerLaw) {
    const std::vector<double> x{10, 20, 40, 80};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 1.25));
    EXPECT_NEAR(loglog_slope(x, y), 1.25, 1e-12);
}

TEST(Aggregate, IdenticalCostsGiveZeros) {
    std::vector<InstanceComparison> rows;
    for (std::size_t t : {3u, 7u, 40u}) {
        InstanceComparison r;
        r.sinks = t;
        r.cost = {5.0, 5.0, 5.0, 5.0};
        r.best = 5.0;
        rows.push_back(r);
    }
    const std::string csv = comparison_csv(rows, false);
    EXPECT_EQ(csv,
              "bucket,count,L1,SL,PD,CD\n"
              "3-5,1,0.00,0.00,0.00,0.00\n"
              "6-14,1,0.00,0.00,0.00,0.00\n"
              "15-29,0,0.00,0.00,0.00,0.00\n"
              ">=30,1,0.00,0.00,0.00,0.00\n"
              "all,3,0.00,0.00,0.00,0.00\n");
}

TEST(Aggregate, MeanOfRelativeIncrease) {
    InstanceComparison a;
    a.sinks = 4;
    a.cost = {11.0, 10.0, 12.0, 10.0};
    a.best = 10.0;
    InstanceComparison b;
    b.sinks = 5;
    b.cost = {20.0, 25.0, 20.0, 30.0};
    b.best = 20.0;
    const auto m = aggregate({a, b});
    ASSERT_EQ(m.size(), 5u);
    EXPECT_EQ(m[0].count, 2u);
    EXPECT_DOUBLE_EQ(m[0].mean[0], 5.0);   // (10 + 0) / 2
    EXPECT_DOUBLE_EQ(m[0].mean[1], 12.5);  // (0 + 25) / 2
    EXPECT_DOUBLE_EQ(m[0].mean[2], 10.0);  // (20 + 0) / 2
    EXPECT_DOUBLE_EQ(m[0].mean[3], 25.0);  // (0 + 50) / 2
}

TEST(Cli, GenIsDeterministicAcrossThreads) {
    const auto a = scratch("gen_a");
    const auto b = scratch("gen_b");
    ASSERT_EQ(run({"--seed", "1", "gen", "--count", "10", "--sinks", "3", "--grid", "6x6x2", "--out", a.string()}).code, 0);
    ASSERT_EQ(run({"--seed", "1", "--threads", "8", "gen", "--count", "10", "--sinks", "3", "--grid", "6x6x2", "--out", b.string()}).code, 0);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(a)) {
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
    }
    EXPECT_EQ(files, 11u);  // 10 instances + manifest
    const auto manifest = read_manifest(a.string());
    ASSERT_EQ(manifest.size(), 10u);
    for (const auto& m : manifest) {
        EXPECT_EQ(m.sinks, 3);
        EXPECT_EQ(m.grid, "6x6x2");
    }
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({"gen", "--sinks", "0", "--out", scratch("zero").string()}).code, kUsage);
    EXPECT_EQ(run({"gen", "--count", "3"}).code, kUsage);  // no --out
    EXPECT_EQ(run({}).code, kUsage);
    EXPECT_EQ(run({"frobnicate"}).code, kUsage);
    EXPECT_EQ(run({"--eta", "0.7", "scale", "--ts", "10"}).code, kUsage);
    EXPECT_EQ(run({"--gamma", "2", "scale", "--ts", "10"}).code, kUsage);
    EXPECT_EQ(run({"--enhancements", "bogus", "scale", "--ts", "10"}).code, kUsage);
    EXPECT_EQ(run({"--help"}).code, kOk);
}

TEST(Cli, ParseAndIoErrors) {
    const auto dir = scratch("bad");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "broken.json") << "{\"graph\": ";
    EXPECT_EQ(run({"solve", "--instance", (dir / "broken.json").string()}).code, kIo);
    EXPECT_EQ(run({"solve", "--instance", (dir / "missing.json").string()}).code, kIo);
    EXPECT_EQ(run({"compare", "--corpus", (dir / "nowhere").string()}).code, kIo);
}

TEST(Cli, SolveRecomputesCost) {
    const auto dir = scratch("solve");
    ASSERT_EQ(run({"--dbif", "1.5", "--eta", "0.25", "gen", "--count", "1", "--sinks", "4", "--out", dir.string()}).code, 0);
    const auto file = (dir / "inst_00000.json").string();
    const auto [g, net] = read_instance(file);
    for (const char* algo : {"cd", "l1", "sl", "pd", "oracle"}) {
        const auto r = run({"--algo", algo, "solve", "--instance", file});
        ASSERT_EQ(r.code, 0) << r.err;
        const EmbeddedTree tree = run_algorithm(algo, g, net, GlobalOptions{});
        EXPECT_EQ(r.out, tree_summary(algo, evaluate_cost(g, net, tree))) << algo;
    }
    const auto topo = run({"--algo", "l1", "solve", "--instance", file, "--dump-topology"});
    EXPECT_NE(topo.out.find("\"edges\""), std::string::npos);
    const auto trace = run({"solve", "--instance", file, "--trace"});
    EXPECT_NE(trace.out.find("iter=3"), std::string::npos);
}

TEST(Cli, CompareSingleSinkCorpusIsAllZero) {
    const auto dir = scratch("single");
    ASSERT_EQ(run({"--dbif", "2", "gen", "--count", "6", "--sinks", "1", "--out", dir.string()}).code, 0);
    const auto r = run({"compare", "--corpus", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("all,6,0.00,0.00,0.00,0.00"), std::string::npos) << r.out;
}

TEST(Cli, VerifyPassesAndCatchesInflatedHeuristic) {
    const auto dir = scratch("verify");
    ASSERT_EQ(run({"--seed", "3", "--dbif", "2", "--eta", "0.25", "gen", "--count", "12", "--sinks", "3-6", "--out", dir.string()}).code, 0);
    const auto ok = run({"verify", "--corpus", dir.string()});
    EXPECT_EQ(ok.code, kOk) << ok.out;
    EXPECT_NE(ok.out.find("OK"), std::string::npos);
    const auto bad = run({"verify", "--corpus", dir.string(), "--inflate-heuristic", "8"});
    EXPECT_EQ(bad.code, kViolation);
    EXPECT_NE(bad.out.find("invariant=astar-neutrality"), std::string::npos) << bad.out;
    std::ofstream(dir / "inst_00002.json") << "not json";
    EXPECT_EQ(run({"verify", "--corpus", dir.string()}).code, kIo);
}

TEST(Cli, OutputIndependentOfThreadCount) {
    const auto dir = scratch("threads");
    ASSERT_EQ(run({"--dbif", "1", "gen", "--count", "8", "--sinks", "2-4", "--out", dir.string()}).code, 0);
    for (std::vector<std::string> cmd : {std::vector<std::string>{"compare", "--corpus", dir.string(), "--per-instance"},
                                         std::vector<std::string>{"oracle", "--corpus", dir.string()},
                                         std::vector<std::string>{"verify", "--corpus", dir.string()}}) {
        auto one = cmd;
        one.insert(one.begin(), {"--threads", "1"});
        auto eight = cmd;
        eight.insert(eight.begin(), {"--threads", "8"});
        const auto a = run(one);
        const auto b = run(eight);
        EXPECT_EQ(a.code, 0) << a.err;
        EXPECT_EQ(a.out, b.out) << cmd[0];
        EXPECT_EQ(a.out, run(one).out) << cmd[0];
    }
}

TEST(Cli, ScaleSingleValueHasNoSlope) {
    const auto r = run({"scale", "--grid", "16x16x2", "--ts", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.find("slope"), std::string::npos);
    const auto many = run({"scale", "--grid", "16x16x2", "--ts", "4,8,16"});
    EXPECT_NE(many.out.find("slope,"), std::string::npos);
}

TEST(Cli, ScaleLabelCountsIncrease) {
    const auto pts = run_scale({24, 24, 2}, {4, 8, 16, 32}, GlobalOptions{});
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GT(pts[i].counters.labels_scanned, pts[i - 1].counters.labels_scanned);
}

TEST(Cli, OutFlagWritesFile) {
    const auto dir = scratch("outflag");
    std::filesystem::create_directories(dir);
    const auto file = dir / "scale.csv";
    const auto r = run({"--out", file.string(), "scale", "--grid", "8x8x1", "--ts", "3"});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(slurp(file).rfind("t,labels_scanned", 0), 0u);
}
