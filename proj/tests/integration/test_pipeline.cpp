#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/graphviz.hpp>

#include "assertfix/error.hpp"
#include "assertfix/pipeline/pipeline.hpp"
#include "assertfix/trace/trace.hpp"
#include "i2c_fixture.hpp"

using namespace assertfix;
using namespace assertfix::pipeline;

namespace {

fs::path corpus() { return fs::path(ASSERTFIX_SOURCE_DIR) / "corpus" / "i2c"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct TempDir {
    fs::path path;
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path = fs::temp_directory_path() / ("assertfix-" + std::to_string(rng()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

PipelineConfig corpus_config() { return load_config(corpus() / "assertfix.cfg"); }

int run_cli(const std::string& args, std::string* out = nullptr) {
    TempDir t;
    auto cmd = std::string(ASSERTFIX_CLI) + " " + args + " > " + (t.path / "o").string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    if (out) *out = slurp(t.path / "o");
    return WEXITSTATUS(rc);
}

const report::AssertionRow& row(const report::FixReport& r, const std::string& name) {
    for (const auto& a : r.assertions) {
        if (a.name == name) return a;
    }
    throw std::runtime_error("no row " + name);
}

} // namespace

TEST(Corpus, GeneratedFilesHaveNotDrifted) {
    auto vcd = trace::write_vcd(testsupport::i2c_trace());
    std::string list = "// bundled assertions, one per line\n";
    for (const auto& [name, text] : testsupport::i2c_assertions()) {
        list += name + ": " + text + "\n";
        EXPECT_EQ(slurp(corpus() / "traces" / (name + ".vcd")), vcd) << name;
    }
    EXPECT_EQ(slurp(corpus() / "assertions.sva"), list);
}

TEST(Pipeline, ReplayReproducesGoldenReport) {
    TempDir t;
    auto cfg = corpus_config();
    cfg.out = t.path;
    run_and_emit(cfg);
    EXPECT_EQ(slurp(t.path / "report.json"), slurp(corpus() / "expected" / "report.json"));
    EXPECT_EQ(slurp(t.path / "report.md"), slurp(corpus() / "expected" / "report.md"));
    for (const auto& [name, text] : testsupport::i2c_assertions()) {
        for (const char* f : {"prompts.txt", "retrieved.json", "chunks.json", "candidates.json", "verdict.json"}) {
            EXPECT_TRUE(fs::exists(t.path / "artifacts" / name / f)) << name << "/" << f;
        }
    }
}

TEST(Pipeline, ReadAddressFixedByGuardCandidate) {
    auto cfg = corpus_config();
    auto res = run_and_emit(cfg);
    const auto& r = row(res.report, "read_txr");
    EXPECT_EQ(r.status, report::AssertionStatus::Fixed);
    EXPECT_EQ(r.kind, std::optional<std::string>("Logic"));
    EXPECT_EQ(r.source, std::optional<std::string>("llm-overridden-by-heuristic"));
    EXPECT_EQ(r.origin, std::optional<std::string>("backward-reconstruction"));
    ASSERT_TRUE(r.fixed);
    EXPECT_NE(r.fixed->find("(wb_adr_i == 3'b101) |-> ##1 (wb_dat_o == $past(txr))"), std::string::npos);
}

TEST(Pipeline, EveryFixValidatesOnItsTraces) {
    auto cfg = corpus_config();
    auto res = run_pipeline(cfg, nullptr);
    for (const auto& r : res.results) {
        if (!r.fixed) continue;
        for (const auto& p : find_traces(corpus() / "traces", r.row.name)) {
            auto ev = trace::evaluate_assertion(*r.fixed, trace::parse_vcd_file(p.string(), "wb_clk_i"));
            EXPECT_TRUE(ev.passed_and_covered()) << r.row.name;
        }
    }
}

TEST(Pipeline, EmptyAssertionList) {
    TempDir t;
    spit(t.path / "empty.sva", "// nothing\n");
    auto cfg = corpus_config();
    cfg.assertions = t.path / "empty.sva";
    auto res = run_pipeline(cfg, nullptr);
    EXPECT_TRUE(res.report.assertions.empty());
    ASSERT_EQ(res.report.designs.size(), 1u);
    EXPECT_FALSE(res.report.designs[0].fr);

    std::string out;
    EXPECT_EQ(run_cli("fix --config " + (corpus() / "assertfix.cfg").string() + " --backend none --out " +
                          (t.path / "o").string(),
                      &out),
              0)
        << out;
}

TEST(Pipeline, FixtureMissIsolatedPerAssertion) {
    TempDir t;
    spit(t.path / "none.jsonl", "");
    auto cfg = corpus_config();
    cfg.fixtures = t.path / "none.jsonl";
    auto res = run_and_emit(cfg);
    for (const auto& r : res.report.assertions) {
        if (r.name == "read_prer_lo") {
            EXPECT_EQ(r.status, report::AssertionStatus::Passing);
            continue;
        }
        EXPECT_EQ(r.status, report::AssertionStatus::Unfixed) << r.name;
        ASSERT_TRUE(r.error) << r.name;
        EXPECT_NE(r.error->find("fixture miss"), std::string::npos);
    }
}

TEST(Pipeline, BatchIsolationUnderShuffleAndBrokenNeighbours) {
    auto base = corpus_config();
    base.backend = "none";
    auto reference = run_pipeline(base, nullptr);
    std::map<std::string, std::string> want;
    for (const auto& r : reference.report.assertions) want[r.name] = nlohmann::json(report::to_json({{}, {}, {r}, {}})["assertions"][0]).dump();

    auto lines = testsupport::i2c_assertions();
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 3; ++trial) {
        TempDir t;
        std::shuffle(lines.begin(), lines.end(), rng);
        std::string list;
        for (const auto& [n, text] : lines) list += n + ": " + text + "\n";
        // a neighbour with an unknown signal and one without traces
        list += "broken: assert property (@(posedge wb_clk_i) nosuch |-> wb_ack_o);\n";
        fs::create_directories(t.path / "traces");
        for (const auto& e : fs::directory_iterator(corpus() / "traces")) fs::copy(e.path(), t.path / "traces");
        fs::copy(corpus() / "traces" / "read_txr.vcd", t.path / "traces" / "broken.vcd");
        list += "orphan: assert property (@(posedge wb_clk_i) wb_ack_o |-> ##1 !wb_ack_o);\n";
        spit(t.path / "a.sva", list);
        auto cfg = base;
        cfg.assertions = t.path / "a.sva";
        cfg.traces = t.path / "traces";
        cfg.jobs = 1 + trial;
        auto res = run_pipeline(cfg, nullptr);
        ASSERT_EQ(res.report.assertions.size(), want.size() + 2);
        for (const auto& r : res.report.assertions) {
            if (r.name == "broken" || r.name == "orphan") {
                EXPECT_EQ(r.status, report::AssertionStatus::Error) << r.name;
                continue;
            }
            EXPECT_EQ(nlohmann::json(report::to_json({{}, {}, {r}, {}})["assertions"][0]).dump(), want[r.name]) << r.name;
        }
    }
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    TempDir t;
    auto base = slurp(corpus() / "assertfix.cfg");
    auto write = [&](const std::string& text) {
        spit(t.path / "c.cfg", text);
        return t.path / "c.cfg";
    };
    EXPECT_THROW(load_config(write(base + "\n[run]\nmystery = 1\n")), ConfigError);
    EXPECT_THROW(load_config(write(base + "\n[extras]\nx = 1\n")), ConfigError);
    auto bad = base;
    bad.replace(bad.find("shift_bound = 3"), 15, "shift_bound = x");
    EXPECT_THROW(load_config(write(bad)), ConfigError);
    auto zero = base;
    zero.replace(zero.find("top_k = 10"), 10, "top_k = 0");
    EXPECT_THROW(load_config(write(zero)).validate(), ConfigError);
    EXPECT_THROW(load_config(write(base)).validate(), ConfigError); // relative paths now point into the temp dir
    EXPECT_THROW(load_config(t.path / "missing.cfg"), IoError);
    EXPECT_NO_THROW(corpus_config().validate());
}

TEST(Config, TraceMapping) {
    TempDir t;
    for (const char* f : {"a.vcd", "a.2.vcd", "a.1.vcd", "ab.vcd", "a.txt", "b.1.vcd"}) spit(t.path / f, "");
    auto got = find_traces(t.path, "a");
    ASSERT_EQ(got.size(), 3u);
    EXPECT_EQ(got[0].filename(), "a.vcd");
    EXPECT_EQ(got[1].filename(), "a.1.vcd");
    EXPECT_EQ(got[2].filename(), "a.2.vcd");
    EXPECT_TRUE(find_traces(t.path, "zz").empty());
}

TEST(Manifest, BundledDesignLineCount) {
    auto m = load_manifest(corpus() / "manifest.json");
    auto c = check_manifest(m);
    EXPECT_TRUE(c.sources_present);
    EXPECT_TRUE(c.within_tolerance) << c.counted << " vs " << m.loc;
    EXPECT_EQ(count_loc("a;\n\n  // c\n/* x\n y */ b;\nc; // t\n"), 3);
}

TEST(Manifest, BenchmarkTable) {
    const std::map<std::string, std::tuple<int, int, int>> want{
        {"i2c", {1282, 13, 24}}, {"ecg", {1635, 2, 17}}, {"pairing", {2145, 5, 22}}, {"sha3", {618, 8, 22}}};
    for (const auto& [file, v] : want) {
        auto m = load_manifest(fs::path(ASSERTFIX_SOURCE_DIR) / "corpus" / "manifests" / (file + ".json"));
        EXPECT_EQ(m.loc, std::get<0>(v));
        EXPECT_EQ(m.assertions.at("timing"), std::get<1>(v));
        EXPECT_EQ(m.assertions.at("logic"), std::get<2>(v));
        auto c = check_manifest(m);
        if (c.sources_present) {
            EXPECT_TRUE(c.within_tolerance) << file << ": " << c.counted << " vs " << m.loc;
        } else {
            EXPECT_FALSE(c.within_tolerance);
        }
    }
}

TEST(Cli, CheckExitCodes) {
    auto vcd = (corpus() / "traces" / "read_txr.vcd").string();
    EXPECT_EQ(run_cli("check \"@(posedge wb_clk_i) (wb_adr_i == 3'b101) |-> ##1 (wb_dat_o == \\$past(txr))\" " + vcd), 0);
    EXPECT_EQ(run_cli("check \"@(posedge wb_clk_i) (wb_adr_i == 3'b100) |-> ##1 (wb_dat_o == \\$past(txr))\" " + vcd), 1);
    EXPECT_EQ(run_cli("check \"(wb_adr_i == 3'b111) && wb_we_i |-> wb_ack_o\" --clock wb_clk_i " + vcd), 2);
    EXPECT_EQ(run_cli("check \"a |-> b\" " + vcd), 78);
    EXPECT_EQ(run_cli("check \"a |-> (\" --clock wb_clk_i " + vcd), 65);
}

TEST(Cli, UsageAndIoErrors) {
    std::string out;
    EXPECT_EQ(run_cli("", &out), 64);
    EXPECT_NE(out.find("Subcommands"), std::string::npos);
    EXPECT_EQ(run_cli("frobnicate"), 64);
    EXPECT_EQ(run_cli("check onlyone"), 64);
    EXPECT_EQ(run_cli("fix --config " + (corpus() / "assertfix.cfg").string() + " --out /proc/forbidden/out"), 74);
    EXPECT_EQ(run_cli("fix --config " + (corpus() / "assertfix.cfg").string() + " --shift-bound 0"), 64);
}

TEST(Cli, CdfgDotParsesWithGraphReader) {
    TempDir t;
    auto dot = t.path / "g.dot";
    ASSERT_EQ(run_cli("cdfg " + (corpus() / "rtl" / "i2c_master_top.v").string() + " " +
                      (corpus() / "rtl" / "i2c_master_byte_ctrl.v").string() + " --dot -o " + dot.string()),
              0);
    using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS,
                                        boost::property<boost::vertex_name_t, std::string>,
                                        boost::property<boost::edge_name_t, std::string>>;
    Graph graph;
    boost::dynamic_properties dp(boost::ignore_other_properties);
    dp.property("node_id", boost::get(boost::vertex_name, graph));
    std::ifstream in(dot);
    ASSERT_TRUE(boost::read_graphviz(in, graph, dp));
    EXPECT_EQ(boost::num_vertices(graph), testsupport::i2c_cdfg().nodes().size());
    EXPECT_GT(boost::num_edges(graph), 0u);
}

TEST(Cli, ReportRerendersGolden) {
    std::string out;
    ASSERT_EQ(run_cli("report " + (corpus() / "expected" / "report.json").string(), &out), 0);
    EXPECT_EQ(out, slurp(corpus() / "expected" / "report.md"));
    ASSERT_EQ(run_cli("report --format json " + (corpus() / "expected" / "report.json").string(), &out), 0);
    EXPECT_EQ(out, slurp(corpus() / "expected" / "report.json"));
}

TEST(Cli, ClassifyAndRetrieve) {
    std::string out;
    auto cfg = (corpus() / "assertfix.cfg").string();
    ASSERT_EQ(run_cli("classify --config " + cfg + " --backend none read_txr ack_delay", &out), 0) << out;
    auto j = nlohmann::json::parse(out);
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["kind"], "Logic");
    EXPECT_EQ(j[1]["kind"], "Timing");
    EXPECT_EQ(j[1]["shift"], -1);
    ASSERT_EQ(run_cli("retrieve --config " + cfg + " read_txr", &out), 0) << out;
    j = nlohmann::json::parse(out);
    std::vector<int> kept;
    for (const auto& c : j["kept"]) kept.push_back(c["id"]);
    EXPECT_EQ(kept, (std::vector<int>{3, 4, 0})); // the mock filter's choice, in retrieval order
    EXPECT_EQ(run_cli("retrieve --config " + cfg), 64);
}
