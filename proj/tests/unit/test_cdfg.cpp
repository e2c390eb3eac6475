#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "assertfix/cdfg/cdfg.hpp"
#include "assertfix/cdfg/predicates.hpp"
#include "assertfix/error.hpp"
#include "random_graph.hpp"

using namespace assertfix;
using namespace assertfix::cdfg;
using namespace assertfix::testsupport;

namespace {

DesignCdfg build(const std::string& src) {
    return build_cdfg(hdl::parse_design({{"t.v", src}}));
}

bool has_edge(const DesignCdfg& g, const std::string& a, const std::string& b, EdgeKind k, Timing t) {
    for (const auto& e : g.edges()) {
        if (g.nodes()[e.src].name == a && g.nodes()[e.dst].name == b && e.kind == k && e.timing == t) return true;
    }
    return false;
}

} // namespace

TEST(BuildCdfg, ContinuousAssign) {
    auto g = build("module m(input a, input b, output y); assign y = a & b; endmodule");
    EXPECT_TRUE(has_edge(g, "a", "y", EdgeKind::Data, Timing::Combinational));
    EXPECT_TRUE(has_edge(g, "b", "y", EdgeKind::Data, Timing::Combinational));
    EXPECT_EQ(g.edges().size(), 2u);
}

TEST(BuildCdfg, GuardedRegister) {
    auto g = build("module m(input clk, input en, input d, output reg q); always @(posedge clk) if (en) q <= d; endmodule");
    EXPECT_TRUE(has_edge(g, "d", "q", EdgeKind::Data, Timing::Sequential));
    EXPECT_TRUE(has_edge(g, "en", "q", EdgeKind::Control, Timing::Sequential));
    EXPECT_EQ(g.edges().size(), 2u);
}

TEST(BuildCdfg, BlockingAssignInClockedBlockIsCombinational) {
    auto g = build("module m(input clk, input d, output reg q); always @(posedge clk) q = d; endmodule");
    EXPECT_TRUE(has_edge(g, "d", "q", EdgeKind::Data, Timing::Combinational));
}

TEST(BuildCdfg, CombinationalLoopIsRejected) {
    try {
        build("module m(input a, output x); wire y; assign x = y & a; assign y = x; endmodule");
        FAIL();
    } catch (const CombinationalLoop& e) {
        EXPECT_GE(e.cycle().size(), 3u);
        EXPECT_EQ(e.cycle().front(), e.cycle().back());
    }
    // A register breaks the loop.
    EXPECT_NO_THROW(build("module m(input clk, input a, output reg x); always @(posedge clk) x <= x ^ a; endmodule"));
}

TEST(BuildCdfg, EdgeSpansLieInsideTheirStatements) {
    const std::string src = R"(module m(input clk, input [1:0] s, input a, input b, output reg q, output y);
  assign y = a | b;
  always @(posedge clk)
    case (s)
      2'd0: q <= a;
      2'd1: if (b) q <= ~a;
      default: q <= 1'b0;
    endcase
endmodule
)";
    auto ast = hdl::parse_design({{"t.v", src}});
    auto g = build_cdfg(ast);
    const auto& m = ast.modules[0];
    for (const auto& e : g.edges()) {
        bool inside = m.assigns[0].span.contains(e.span) || m.always_blocks[0].span.contains(e.span);
        EXPECT_TRUE(inside);
    }
}

TEST(BuildCdfg, FlattensInstances) {
    auto g = build(R"(
module leaf(input clk, input d, output reg q); always @(posedge clk) q <= d; endmodule
module top(input clk, input x, output y);
  wire mid;
  leaf u0 (.clk(clk), .d(x), .q(mid));
  leaf u1 (clk, mid, y);
endmodule
)");
    EXPECT_EQ(g.top(), "top");
    EXPECT_TRUE(g.has("u0.q"));
    auto cone = cone_of_influence(g, {"y"}, Direction::Backward);
    EXPECT_EQ(cone.at("x"), 2);
    EXPECT_EQ(cone.at("u1.q"), 0);
    EXPECT_EQ(cone.at("u1.d"), 1);
}

TEST(ConeOfInfluence, SeedWithoutInputs) {
    auto g = build("module m(input a, output y); assign y = a; endmodule");
    auto c = cone_of_influence(g, {"a"}, Direction::Backward);
    EXPECT_EQ(c, (Cone{{"a", 0}}));
    EXPECT_THROW(cone_of_influence(g, {"nope"}, Direction::Backward), UnknownSignal);
}

TEST(ConeOfInfluence, SequentialChain) {
    auto g = build(R"(module m(input clk, input a, output reg c);
  reg b;
  always @(posedge clk) b <= a;
  always @(posedge clk) c <= b;
endmodule)");
    auto cone = cone_of_influence(g, {"c"}, Direction::Backward);
    EXPECT_EQ(cone, (Cone{{"c", 0}, {"b", 1}, {"a", 2}}));
    EXPECT_EQ(cone_of_influence(g, {"c"}, Direction::Backward, 1), (Cone{{"c", 0}, {"b", 1}}));
}

TEST(ConeOfInfluence, RandomDagsMatchBruteForce) {
    std::mt19937_64 rng(1234);
    for (int iter = 0; iter < 1000; ++iter) {
        int n = 2 + static_cast<int>(rng() % 49);
        auto rg = random_graph(rng, n, 2.5 / n, false);
        auto g = build(to_verilog(rg));
        int seed = static_cast<int>(rng() % n);
        // Brute force: relax to a fixpoint over the edge list.
        std::vector<int> dist(n, 1 << 20);
        dist[seed] = 0;
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& [a, b, s] : rg.edges) {
                int d = dist[b] + (s ? 1 : 0);
                if (dist[b] < (1 << 20) && d < dist[a]) {
                    dist[a] = d;
                    changed = true;
                }
            }
        }
        Cone want;
        for (int i = 0; i < n; ++i) {
            if (dist[i] < (1 << 20)) want["n" + std::to_string(i)] = dist[i];
        }
        ASSERT_EQ(cone_of_influence(g, {"n" + std::to_string(seed)}, Direction::Backward), want) << to_verilog(rg);
    }
}

TEST(ConeOfInfluence, MonotoneIdempotentAndDual) {
    std::mt19937_64 rng(77);
    for (int iter = 0; iter < 100; ++iter) {
        int n = 3 + static_cast<int>(rng() % 20);
        auto rg = random_graph(rng, n, 2.0 / n, true);
        auto g = build(to_verilog(rg));
        std::set<std::string> s{"n0"}, t{"n0", "n" + std::to_string(rng() % n)};
        auto cs = cone_signals(cone_of_influence(g, s, Direction::Backward));
        auto ct = cone_signals(cone_of_influence(g, t, Direction::Backward));
        EXPECT_TRUE(std::includes(ct.begin(), ct.end(), cs.begin(), cs.end()));
        EXPECT_EQ(cone_signals(cone_of_influence(g, cs, Direction::Backward)), cs);
        for (int a = 0; a < n; ++a) {
            auto back = cone_signals(cone_of_influence(g, {"n" + std::to_string(a)}, Direction::Backward));
            for (int b = 0; b < n; ++b) {
                auto fwd = cone_signals(cone_of_influence(g, {"n" + std::to_string(b)}, Direction::Forward));
                EXPECT_EQ(back.count("n" + std::to_string(b)) > 0, fwd.count("n" + std::to_string(a)) > 0);
            }
        }
    }
}

TEST(GuardConditions, CaseItemIfNestingAndUnguarded) {
    auto g = build(R"(module m(input clk, input [2:0] wb_adr_i, input p, input q, input s, input a,
  output reg [7:0] wb_dat_o, output reg r, output y);
  reg [7:0] txr, sr;
  assign y = a;
  always @(posedge clk)
    case (wb_adr_i)
      3'b100: wb_dat_o <= sr;
      3'b101: wb_dat_o <= txr;
      default: wb_dat_o <= 8'h00;
    endcase
  always @(posedge clk) if (p) if (q) r <= s;
endmodule)");
    auto dat = guard_conditions(g, "wb_dat_o");
    ASSERT_EQ(dat.size(), 3u);
    EXPECT_EQ(hdl::render_expr(*dat[1].guard_expr()), "wb_adr_i == 3'b101");
    EXPECT_EQ(hdl::render_expr(*dat[1].rhs), "txr");
    EXPECT_EQ(dat[1].timing, Timing::Sequential);
    EXPECT_EQ(hdl::render_expr(*dat[2].guard_expr()), "wb_adr_i != 3'b100 && wb_adr_i != 3'b101");
    EXPECT_TRUE(guard_conditions(g, "y").at(0).guard.empty());
    EXPECT_EQ(hdl::render_expr(*guard_conditions(g, "r").at(0).guard_expr()), "p && q");
    EXPECT_THROW(guard_conditions(g, "ghost"), UnknownSignal);
}

TEST(GuardConditions, ElseBranchNegates) {
    auto g = build(R"(module m(input clk, input rst, input [1:0] m, input d, output reg q);
  always @(posedge clk) if (rst) q <= 1'b0; else if (m == 2'd2) q <= d;
endmodule)");
    auto as = guard_conditions(g, "q");
    ASSERT_EQ(as.size(), 2u);
    EXPECT_EQ(hdl::render_expr(*as[1].guard_expr()), "!rst && m == 2'd2");
}

TEST(SequentialDepth, Basics) {
    auto g = build("module m(input clk, input d, output reg q); always @(posedge clk) q <= d; endmodule");
    EXPECT_EQ(sequential_depth(g, "d", "d"), (DepthRange{0, 0}));
    EXPECT_EQ(sequential_depth(g, "d", "q"), (DepthRange{1, 1}));
    EXPECT_EQ(sequential_depth(g, "q", "d"), std::nullopt);
}

TEST(SequentialDepth, RandomGraphsMatchEnumeration) {
    std::mt19937_64 rng(4321);
    for (int iter = 0; iter < 300; ++iter) {
        int n = 2 + static_cast<int>(rng() % 19);
        auto rg = random_graph(rng, n, 1.8 / n, true);
        auto g = build(to_verilog(rg));
        int from = static_cast<int>(rng() % n);
        auto paths = enumerate_paths(rg, from);
        for (int to = 0; to < n; ++to) {
            auto got = sequential_depth(g, "n" + std::to_string(from), "n" + std::to_string(to));
            auto it = paths.find(to);
            if (it == paths.end()) {
                EXPECT_FALSE(got.has_value());
                continue;
            }
            ASSERT_TRUE(got.has_value());
            EXPECT_EQ(got->min, std::min(it->second.first, 8));
            EXPECT_EQ(got->max, std::min(it->second.second, 8)) << to_verilog(rg) << from << "->" << to;
        }
    }
}

TEST(Predicates, ImplicationAndContradiction) {
    auto p = [](const char* s) { return hdl::parse_expression(s); };
    EXPECT_TRUE(implies({p("a == 3'd5 && b")}, p("a != 3'd4")));
    EXPECT_TRUE(implies({p("a == 3'd5 && b")}, p("b && a == 5")));
    EXPECT_FALSE(implies({p("a == 3'd5")}, p("a == 3'd4")));
    EXPECT_FALSE(implies({p("a")}, p("c")));
    EXPECT_TRUE(implies({}, p("1'b1")) == false);
    EXPECT_TRUE(contradicts(constraints_of({p("a == 3'b100")}), constraints_of({p("a == 3'b101")})));
    EXPECT_TRUE(contradicts(constraints_of({p("!en")}), constraints_of({p("en")})));
    EXPECT_FALSE(contradicts(constraints_of({p("a == 3'b100")}), constraints_of({p("b == 3'b101")})));
}

TEST(Dot, ContainsNodesAndEdges) {
    auto g = build("module m(input clk, input en, input d, output reg q); always @(posedge clk) if (en) q <= d; endmodule");
    auto dot = to_dot(g);
    EXPECT_NE(dot.find("digraph cdfg"), std::string::npos);
    EXPECT_NE(dot.find("\"d\" -> \"q\" [kind=data, timing=sequential"), std::string::npos);
    EXPECT_NE(dot.find("\"en\" -> \"q\" [kind=control, timing=sequential"), std::string::npos);
}
