#include <gtest/gtest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "assertfix/error.hpp"
#include "assertfix/retrieval/retrieval.hpp"

using namespace assertfix;
using namespace assertfix::retrieval;

namespace {

hdl::DesignAst load_i2c() {
    std::string dir = std::string(ASSERTFIX_SOURCE_DIR) + "/corpus/i2c/rtl/";
    return hdl::parse_design_files({dir + "i2c_master_top.v", dir + "i2c_master_byte_ctrl.v"});
}

const RtlChunk* chunk_at(const std::vector<RtlChunk>& chunks, const std::string& file, int line) {
    for (const auto& c : chunks) {
        if (c.file == file && c.start_line <= line && line <= c.end_line) return &c;
    }
    return nullptr;
}

std::vector<int> ids(const std::vector<ScoredChunk>& v) {
    std::vector<int> out;
    for (const auto& s : v) out.push_back(s.chunk->id);
    return out;
}

std::vector<int> ids(const std::vector<RtlChunk>& v) {
    std::vector<int> out;
    for (const auto& c : v) out.push_back(c.id);
    return out;
}

const char* kSmall = R"(module m (input clk, input a, output reg q, output w);
  reg r;
  assign w = a & r;
  always @(posedge clk) r <= a;
  always @(posedge clk) q <= r;
endmodule
)";

} // namespace

TEST(Chunking, ConstructPerChunk) {
    auto ast = hdl::parse_design({{"m.v", kSmall}});
    auto chunks = chunk_design(ast);
    int logic = 0, decl = 0;
    for (const auto& c : chunks) (c.is_logic() ? logic : decl)++;
    EXPECT_EQ(logic, 3);
    EXPECT_GE(decl, 1);
    EXPECT_EQ(chunks.front().kind, ChunkKind::Declarations);
    EXPECT_TRUE(chunks.front().declared.count("q"));
    EXPECT_TRUE(chunks.front().declared.count("r"));
    EXPECT_EQ(chunks[1].defined, (std::set<std::string>{"w"}));
    EXPECT_EQ(chunks[1].used, (std::set<std::string>{"a", "r"}));
}

TEST(Chunking, EmptyModuleIsDeclarationsOnly) {
    auto ast = hdl::parse_design({{"e.v", "module e;\nendmodule\n"}});
    auto chunks = chunk_design(ast);
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_FALSE(chunks[0].is_logic());
    EXPECT_EQ(chunks[0].start_line, 1);
    EXPECT_EQ(chunks[0].end_line, 2);
}

TEST(Chunking, EveryLineInExactlyOneChunk) {
    auto ast = load_i2c();
    std::string two = std::string("// lead\n\n") + kSmall + "\n// between\nmodule e;\nendmodule\n// trail\n";
    auto ast2 = hdl::parse_design({{"two.v", two}});
    for (const auto* a : {&ast, &ast2}) {
        auto chunks = chunk_design(*a);
        for (const auto& f : a->files) {
            std::vector<int> owner(static_cast<std::size_t>(f.line_count()) + 1, 0);
            for (const auto& c : chunks) {
                if (c.file != f.path) continue;
                ASSERT_LE(c.start_line, c.end_line);
                for (int l = c.start_line; l <= c.end_line; ++l) owner[static_cast<std::size_t>(l)]++;
            }
            for (int l = 1; l <= f.line_count(); ++l) EXPECT_EQ(owner[static_cast<std::size_t>(l)], 1) << f.path << ":" << l;
        }
        // ordered, non-overlapping, and text matches the span
        for (std::size_t i = 1; i < chunks.size(); ++i) {
            if (chunks[i].file == chunks[i - 1].file) EXPECT_EQ(chunks[i].start_line, chunks[i - 1].end_line + 1);
        }
    }
}

TEST(Chunking, DefinedSetsAgreeWithCdfgAssignments) {
    auto ast = load_i2c();
    auto chunks = chunk_design(ast);
    auto g = cdfg::build_cdfg(ast);
    const std::string top_file = ast.files[0].path;
    // Oracle: each top-level assignment's target is defined by the chunk holding its source line.
    std::map<int, std::set<std::string>> expected;
    for (const auto& ga : g.assignments()) {
        if (ga.target.find('.') != std::string::npos || ga.span.file != 0) continue;
        const RtlChunk* c = chunk_at(chunks, top_file, ga.span.begin_line);
        ASSERT_NE(c, nullptr) << ga.target;
        expected[c->id].insert(ga.target);
    }
    for (const auto& c : chunks) {
        if (c.file != top_file || !c.is_logic()) continue;
        if (c.kind == ChunkKind::Instance) {
            // port-connection assignments carry both directions; only outputs define
            for (const auto& d : c.defined) EXPECT_TRUE(expected[c.id].count(d)) << d;
            continue;
        }
        EXPECT_EQ(c.defined, expected[c.id]) << "chunk " << c.id;
    }
}

TEST(Retrieval, RegisterReadCaseRanksFirst) {
    auto ast = load_i2c();
    auto g = cdfg::build_cdfg(ast);
    ChunkIndex index(chunk_design(ast));
    auto drivers = cdfg::guard_conditions(g, "wb_dat_o");
    ASSERT_FALSE(drivers.empty());
    const RtlChunk* oracle = chunk_at(index.chunks(), ast.files[0].path, drivers.front().span.begin_line);
    for (const auto& d : drivers) EXPECT_EQ(chunk_at(index.chunks(), ast.files[0].path, d.span.begin_line), oracle);
    auto hits = coarse_retrieve(index, "wb_dat_o", 10);
    ASSERT_FALSE(hits.empty());
    EXPECT_EQ(hits[0].chunk, oracle);
    EXPECT_NE(hits[0].chunk->text.find("3'b101: wb_dat_o <= txr;"), std::string::npos);
}

TEST(Retrieval, UniqueDefinerWithKOne) {
    auto ast = hdl::parse_design({{"m.v", kSmall}});
    ChunkIndex index(chunk_design(ast));
    auto hits = coarse_retrieve(index, "q", 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_TRUE(hits[0].chunk->defined.count("q"));
}

TEST(Retrieval, UnknownSignalWarns) {
    auto ast = hdl::parse_design({{"m.v", kSmall}});
    ChunkIndex index(chunk_design(ast));
    std::vector<std::string> warnings;
    EXPECT_TRUE(coarse_retrieve(index, "nope", 5, &warnings).empty());
    EXPECT_EQ(warnings.size(), 1u);
    EXPECT_THROW(coarse_retrieve(index, "q", 0), ConfigError);
}

TEST(Retrieval, DefinersOutrankUsersForEverySignal) {
    auto ast = load_i2c();
    ChunkIndex index(chunk_design(ast));
    std::set<std::string> all;
    for (const auto& c : index.chunks()) all.insert(c.defined.begin(), c.defined.end());
    for (const auto& s : all) {
        auto hits = coarse_retrieve(index, s, 1000);
        bool seen_non_definer = false;
        for (const auto& h : hits) {
            bool def = h.chunk->defined.count(s) > 0;
            if (!def) seen_non_definer = true;
            EXPECT_FALSE(def && seen_non_definer) << s;
        }
        EXPECT_EQ(ids(hits), ids(coarse_retrieve(index, s, 1000))) << "deterministic " << s;
    }
}

TEST(Retrieval, MergeAcrossConsequentSignals) {
    auto ast = load_i2c();
    ChunkIndex index(chunk_design(ast));
    auto a = hdl::parse_assertion("(wb_adr_i == 3'b100) |-> ##1 (wb_dat_o == $past(txr))");
    auto hits = retrieve_for_assertion(index, a, 10);
    EXPECT_LE(hits.size(), 10u);
    for (std::size_t i = 1; i < hits.size(); ++i) EXPECT_GE(hits[i - 1].score, hits[i].score);
    auto has_txr_writer = std::any_of(hits.begin(), hits.end(), [](const ScoredChunk& s) { return s.chunk->defined.count("txr") > 0; });
    EXPECT_TRUE(has_txr_writer);
}

TEST(FineFilter, TxrWriterSurvivesOnI2c) {
    auto ast = load_i2c();
    auto g = cdfg::build_cdfg(ast);
    ChunkIndex index(chunk_design(ast));
    auto a = hdl::parse_assertion("(wb_adr_i == 3'b100) |-> ##1 (wb_dat_o == $past(txr))");
    ASSERT_TRUE(cdfg::cone_signals(cdfg::cone_of_influence(g, {"wb_dat_o"}, cdfg::Direction::Backward)).count("txr"));
    auto hits = retrieve_for_assertion(index, a, 10);
    auto kept = fine_filter(hits, a, g);
    EXPECT_TRUE(std::any_of(kept.begin(), kept.end(), [](const RtlChunk& c) { return c.defined.count("txr") > 0; }));
    // order-preserving subset
    auto in = ids(hits);
    std::size_t pos = 0;
    for (int id : ids(kept)) {
        while (pos < in.size() && in[pos] != id) ++pos;
        ASSERT_LT(pos, in.size());
    }
}

TEST(FineFilter, DisjointChunkRemoved) {
    const char* src = R"(module m (input clk, input a, input b, output reg q, output reg z);
  always @(posedge clk) q <= a;
  always @(posedge clk) z <= b;
endmodule
)";
    auto ast = hdl::parse_design({{"m.v", src}});
    auto g = cdfg::build_cdfg(ast);
    ChunkIndex index(chunk_design(ast));
    std::vector<ScoredChunk> all;
    for (const auto& c : index.chunks()) all.push_back({&c, 0});
    auto kept = fine_filter(all, hdl::parse_assertion("a |=> q"), g);
    for (const auto& c : kept) EXPECT_FALSE(c.defined.count("z"));
    EXPECT_TRUE(std::any_of(kept.begin(), kept.end(), [](const RtlChunk& c) { return c.defined.count("q") > 0; }));
}

TEST(FineFilter, LlmSubsetContract) {
    std::vector<RtlChunk> store(10);
    for (int i = 0; i < 10; ++i) store[static_cast<std::size_t>(i)].id = i;
    std::vector<ScoredChunk> input;
    for (int id : {1, 2, 5, 9}) input.push_back({&store[static_cast<std::size_t>(id)], 1.0});
    cdfg::DesignCdfg empty;
    auto a = hdl::parse_assertion("a |-> b");
    llm::MockBackend m(std::vector<llm::MockBackend::Rule>{{"chunk", "reasoning... <keep>5</keep> <keep>2, 7</keep>"}});
    std::vector<std::string> warnings;
    auto kept = fine_filter(input, a, empty, &m, &warnings);
    EXPECT_EQ(ids(kept), (std::vector<int>{2, 5}));
    EXPECT_EQ(warnings.size(), 1u);

    llm::MockBackend bad(std::vector<llm::MockBackend::Rule>{{".*", "I think chunks 2 and 5"}});
    EXPECT_THROW(fine_filter(input, a, empty, &bad), LlmBackendError);
}

TEST(ChunkDump, JsonShape) {
    auto ast = hdl::parse_design({{"m.v", kSmall}});
    auto j = nlohmann::json::parse(dump_chunks_json(chunk_design(ast)));
    ASSERT_TRUE(j.is_array());
    for (const auto& c : j) {
        for (const char* k : {"id", "module", "file", "start_line", "end_line", "defined", "used"}) EXPECT_TRUE(c.contains(k)) << k;
    }
}

TEST(Tokenize, SplitsCompoundNames) {
    auto t = tokenize("wb_dat_o <= txr;");
    EXPECT_EQ(t, (std::vector<std::string>{"wb_dat_o", "wb", "dat", "o", "txr"}));
    EXPECT_EQ(strip_signal_suffix("wb_dat_o"), "wb_dat");
    EXPECT_EQ(strip_signal_suffix("o"), "o");
}
