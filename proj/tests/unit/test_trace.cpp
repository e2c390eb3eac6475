#include <gtest/gtest.h>

#include "assertfix/error.hpp"
#include "assertfix/trace/trace.hpp"
#include "random_trace.hpp"

using namespace assertfix;
using namespace assertfix::trace;
using assertfix::hdl::parse_assertion;
using assertfix::testsupport::make_trace;
using assertfix::testsupport::random_trace;

namespace {

const char* kToggleVcd = R"($timescale 1ns $end
$scope module tb $end
$var wire 1 ! clk $end
$var wire 1 " d $end
$var wire 4 # bus [3:0] $end
$upscope $end
$enddefinitions $end
#0
$dumpvars
0!
1"
b0000 #
$end
#5
1!
#10
0!
b0011 #
#15
1!
#20
0!
#25
1!
bx #
#30
0!
#35
1!
#40
0!
#45
1!
#50
0!
)";

} // namespace

TEST(ParseVcd, FiveRisingEdges) {
    auto t = parse_vcd(kToggleVcd, "clk");
    EXPECT_EQ(t.length(), 5u);
    ASSERT_TRUE(t.has("d"));
    for (int i = 0; i < 5; ++i) EXPECT_EQ(t.at("d", i), Value::of(1, 1));
    EXPECT_FALSE(t.has("clk"));
    EXPECT_EQ(t.find("tb.bus")->width, 4u);
    EXPECT_EQ(t.at("bus", 0), Value::of(4, 0));
    EXPECT_EQ(t.at("bus", 1), Value::of(4, 3));
    // The change at #25 lands with the edge and is sampled.
    EXPECT_FALSE(t.at("bus", 2).known);
}

TEST(ParseVcd, UnknownPropagatesIntoEvaluation) {
    auto t = parse_vcd(kToggleVcd, "clk");
    auto r = evaluate_assertion(parse_assertion("d |-> (bus == 4'd3) || (bus == 4'd0)"), t);
    EXPECT_EQ(r.attempts[2].verdict, Verdict::Fail);
    EXPECT_EQ(r.first_failure, std::optional<int>(2));
}

TEST(ParseVcd, Errors) {
    EXPECT_THROW(parse_vcd(kToggleVcd, "nope"), MissingClock);
    EXPECT_THROW(parse_vcd("$var wire 1 ! clk $end\n$enddefinitions $end\n#0\n0?\n", "clk"), VcdSyntaxError);
    EXPECT_THROW(parse_vcd("$var wire 1 ! clk $end\n", "clk"), VcdSyntaxError);
    try {
        parse_vcd("$var wire 1 ! clk $end\n$enddefinitions $end\n#5\n1!\n#3\n", "clk");
        FAIL();
    } catch (const VcdSyntaxError& e) {
        EXPECT_EQ(e.line(), 5);
    }
}

TEST(ParseVcd, FallingEdgeSampling) {
    auto t = parse_vcd(kToggleVcd, "clk", ClockEdge::Falling);
    EXPECT_EQ(t.length(), 5u);
    EXPECT_EQ(t.at("bus", 0), Value::of(4, 3));
}

TEST(WriteVcd, RoundTripRandom) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto t = random_trace(rng, {{"a", 1}, {"b", 1}, {"data", 8}, {"wide", 64}, {"adr", 3}}, 1 + i % 17, 0.1);
        auto back = parse_vcd(write_vcd(t), "clk");
        ASSERT_EQ(back, t) << write_vcd(t);
    }
}

TEST(WriteVcd, Format) {
    auto t = make_trace({{{"a", 1}, {0, 1}}, {{"v", 4}, {5, 5}}});
    EXPECT_EQ(write_vcd(t), "$timescale 1ns $end\n"
                            "$scope module top $end\n"
                            "$var wire 1 ! clk $end\n"
                            "$var wire 1 \" a $end\n"
                            "$var reg 4 # v [3:0] $end\n"
                            "$upscope $end\n"
                            "$enddefinitions $end\n"
                            "#0\n$dumpvars\n0!\n0\"\nb101 #\n$end\n"
                            "#5\n1!\n#10\n0!\n"
                            "#15\n1!\n1\"\n#20\n0!\n");
}

TEST(Evaluate, AntecedentNeverTrueIsVacuousPass) {
    auto t = make_trace({{{"a", 1}, {0, 0, 0, 0}}, {{"b", 1}, {0, 0, 0, 0}}});
    auto r = evaluate_assertion(parse_assertion("a |-> b"), t);
    EXPECT_TRUE(r.passed());
    EXPECT_FALSE(r.covered);
}

TEST(Evaluate, HandTraceRegisterRead) {
    // wb_adr_i = 5 and txr = 0xAB at cycle 3; wb_dat_o = 0xAB at cycle 4.
    auto t = make_trace({
        {{"wb_adr_i", 3}, {0, 0, 0, 5, 0, 0}},
        {{"txr", 8}, {0, 0, 0, 0xAB, 0xAB, 0}},
        {{"wb_dat_o", 8}, {0, 0, 0, 0, 0xAB, 0}},
    });
    auto r = evaluate_assertion(parse_assertion("(wb_adr_i == 3'b101) |-> ##1 (wb_dat_o == $past(txr))"), t);
    EXPECT_EQ(r.attempts[3].verdict, Verdict::Pass);
    EXPECT_TRUE(r.passed_and_covered());
    for (int i : {0, 1, 2, 4}) EXPECT_EQ(r.attempts[i].verdict, Verdict::Vacuous);
    EXPECT_EQ(r.attempts[5].verdict, Verdict::Vacuous); // window runs past the end
}

TEST(Evaluate, PastBeforeStartIsUnknownAndFails) {
    auto t = make_trace({{{"a", 1}, {1, 0, 0}}, {{"b", 1}, {1, 1, 1}}});
    auto r = evaluate_assertion(parse_assertion("a |-> $past(b)"), t);
    EXPECT_EQ(r.attempts[0].verdict, Verdict::Fail);
}

TEST(Evaluate, UnknownAntecedentIsVacuous) {
    trace::CounterexampleTrace t("clk", 2);
    t.add_signal({"a", "", "", 1, 0, {Value::unknown(1), Value::of(1, 1)}});
    t.add_signal({"b", "", "", 1, 0, {Value::of(1, 0), Value::of(1, 1)}});
    auto r = evaluate_assertion(parse_assertion("a |-> b"), t);
    EXPECT_EQ(r.attempts[0].verdict, Verdict::Vacuous);
    EXPECT_EQ(r.attempts[1].verdict, Verdict::Pass);
}

TEST(Evaluate, DisableMakesAttemptVacuous) {
    auto t = make_trace({{{"rst", 1}, {0, 1, 0, 0}}, {{"a", 1}, {1, 1, 1, 1}}, {{"b", 1}, {0, 0, 1, 1}}});
    auto r = evaluate_assertion(parse_assertion("disable iff (rst) a |=> b"), t);
    EXPECT_EQ(r.attempts[0].verdict, Verdict::Vacuous);
    EXPECT_EQ(r.attempts[1].verdict, Verdict::Vacuous);
    EXPECT_EQ(r.attempts[2].verdict, Verdict::Pass);
    EXPECT_TRUE(r.passed());
}

TEST(Evaluate, EdgeFunctions) {
    auto t = make_trace({{{"a", 1}, {0, 1, 1, 0}}, {{"r", 1}, {0, 1, 0, 0}}, {{"f", 1}, {0, 0, 0, 1}}});
    EXPECT_TRUE(evaluate_assertion(parse_assertion("##1 ($rose(a) == r)"), t).passed());
    EXPECT_TRUE(evaluate_assertion(parse_assertion("##1 ($fell(a) == f)"), t).passed());
    auto st = evaluate_assertion(parse_assertion("##1 $stable(a)"), t);
    EXPECT_EQ(st.attempts[0].verdict, Verdict::Fail);
    EXPECT_EQ(st.attempts[1].verdict, Verdict::Pass);
}

TEST(Evaluate, MissingAndWideSignals) {
    auto t = make_trace({{{"a", 1}, {1}}});
    EXPECT_THROW(evaluate_assertion(parse_assertion("a |-> zz"), t), SignalMissing);
    trace::CounterexampleTrace w("clk", 1);
    w.add_signal({"big", "", "", 128, 0, {Value::unknown(128)}});
    EXPECT_THROW(evaluate_assertion(parse_assertion("big |-> 1'b1"), w), WidthMismatch);
}

TEST(Evaluate, OverallFailIffSomeAttemptFails) {
    std::mt19937_64 rng(11);
    auto a = parse_assertion("(a && !b) |=> ##1 (c != $past(a))");
    for (int i = 0; i < 300; ++i) {
        auto t = random_trace(rng, {{"a", 1}, {"b", 1}, {"c", 1}}, 8, 0.05);
        auto r = evaluate_assertion(a, t);
        bool any_fail = false, any_real = false;
        for (const auto& at : r.attempts) {
            any_fail = any_fail || at.verdict == Verdict::Fail;
            any_real = any_real || at.verdict != Verdict::Vacuous;
        }
        EXPECT_EQ(r.overall == Verdict::Fail, any_fail);
        EXPECT_EQ(r.covered, any_real);
    }
}

TEST(Evaluate, ConstantFalseAntecedentNeverCovers) {
    std::mt19937_64 rng(3);
    auto a = parse_assertion("1'b0 |-> ##2 (x == y)");
    for (int i = 0; i < 100; ++i) {
        auto r = evaluate_assertion(a, random_trace(rng, {{"x", 4}, {"y", 4}}, 10, 0.2));
        EXPECT_TRUE(r.passed());
        EXPECT_FALSE(r.covered);
    }
}

TEST(Evaluate, MonotoneWindow) {
    std::mt19937_64 rng(5);
    auto a = parse_assertion("1'b1 |=> ##2 p ##1 q");
    auto t = random_trace(rng, {{"p", 1}, {"q", 1}}, 12);
    auto r = evaluate_assertion(a, t);
    const int n = 12;
    for (int i = 0; i + a.window() <= n - 1; ++i) EXPECT_NE(r.attempts[i].verdict, Verdict::Vacuous);
    for (int i = n - a.window(); i < n; ++i) EXPECT_EQ(r.attempts[i].verdict, Verdict::Vacuous);
}

TEST(Evaluate, WidthSemantics) {
    auto t = make_trace({{{"a", 4}, {0xF}}, {{"b", 4}, {0x1}}, {{"s", 5}, {0x10}}});
    // Context width 5 keeps the carry.
    EXPECT_TRUE(evaluate_assertion(parse_assertion("(a + b) == s"), t).passed_and_covered());
    EXPECT_TRUE(evaluate_assertion(parse_assertion("a[3:2] == 2'b11"), t).passed_and_covered());
    EXPECT_TRUE(evaluate_assertion(parse_assertion("{a, b} == 8'hF1"), t).passed_and_covered());
    EXPECT_TRUE(evaluate_assertion(parse_assertion("&a && !(&b) && ^s"), t).passed_and_covered());
}

TEST(ShiftConsequent, Examples) {
    auto a = parse_assertion("x |-> ##1 y");
    EXPECT_EQ(shift_consequent(a, 1).delays(), std::vector<int>{2});
    EXPECT_EQ(shift_consequent(a, -1).delays(), std::vector<int>{0});
    auto p = parse_assertion("x |-> ##0 (d == $past(txr))");
    EXPECT_EQ(shift_consequent(p, -1), parse_assertion("x |-> (d == $past(txr, 2))"));
    EXPECT_THROW(shift_consequent(parse_assertion("x |-> y"), -1), UnrepresentableShift);
    EXPECT_EQ(shift_consequent(a, 0), a);
}

TEST(ShiftConsequent, NonOverlappedImplication) {
    auto a = parse_assertion("x |=> y");
    EXPECT_EQ(shift_consequent(a, 1), parse_assertion("x |=> ##1 y"));
    EXPECT_EQ(shift_consequent(a, -1), parse_assertion("x |-> y"));
    auto p = parse_assertion("x |=> (y == $past(z))");
    EXPECT_EQ(shift_consequent(p, -2), parse_assertion("x |-> (y == $past(z, 2))"));
}

TEST(ShiftConsequent, PastAbsorptionMatchesReference) {
    // Reference: ante at i implies d[i] == txr[i-2]; cycles before 0 are unknown.
    std::mt19937_64 rng(99);
    auto shifted = shift_consequent(parse_assertion("e |-> (d == $past(txr))"), -1);
    for (int iter = 0; iter < 500; ++iter) {
        auto t = random_trace(rng, {{"e", 1}, {"d", 2}, {"txr", 2}}, 7);
        auto r = evaluate_assertion(shifted, t);
        for (int i = 0; i < 7; ++i) {
            Verdict want = Verdict::Vacuous;
            if (t.at("e", i).bits) {
                want = i >= 2 && t.at("d", i).bits == t.at("txr", i - 2).bits ? Verdict::Pass : Verdict::Fail;
            }
            ASSERT_EQ(r.attempts[i].verdict, want);
        }
    }
}

TEST(ShiftConsequent, IdentityAndComposition) {
    std::mt19937_64 rng(21);
    const char* forms[] = {"a |-> ##2 (b == $past(c))", "a |=> ##1 b ##1 c", "a |-> ##3 $past(b, 2)"};
    for (const char* f : forms) {
        auto a = parse_assertion(f);
        for (int iter = 0; iter < 50; ++iter) {
            auto t = random_trace(rng, {{"a", 1}, {"b", 1}, {"c", 1}}, 10);
            auto base = evaluate_assertion(a, t);
            auto ident = evaluate_assertion(shift_consequent(a, 0), t);
            EXPECT_EQ(base.first_failure, ident.first_failure);
            EXPECT_EQ(base.covered, ident.covered);
            // Same-sign pairs compose; so do mixed pairs that never reach $past absorption.
            for (int j = -3; j <= 3; ++j) {
                for (int k = -3; k <= 3; ++k) {
                    bool same_sign = (j >= 0 && k >= 0) || (j <= 0 && k <= 0);
                    int floor = a.step_offset(0);
                    bool no_absorb = floor + j >= 0 && floor + j + k >= 0 && floor + k >= 0;
                    if (!same_sign && !no_absorb) continue;
                    try {
                        auto twice = shift_consequent(shift_consequent(a, j), k);
                        auto once = shift_consequent(a, j + k);
                        auto r1 = evaluate_assertion(twice, t);
                        auto r2 = evaluate_assertion(once, t);
                        ASSERT_EQ(r1.attempts.size(), r2.attempts.size());
                        for (std::size_t i = 0; i < r1.attempts.size(); ++i) {
                            ASSERT_EQ(r1.attempts[i].verdict, r2.attempts[i].verdict) << f << " j=" << j << " k=" << k;
                        }
                    } catch (const UnrepresentableShift&) {
                    }
                }
            }
        }
    }
}
