#include "assertfix/fix/fix.hpp"

#include <algorithm>
#include <sstream>

#include "assertfix/cdfg/predicates.hpp"
#include "assertfix/error.hpp"

namespace assertfix::fix {

using hdl::Expr;
using hdl::ExprKind;
using hdl::ExprPtr;
using hdl::SvaAssertion;
using trace::CounterexampleTrace;

std::string_view to_string(Origin o) noexcept {
    switch (o) {
    case Origin::ShiftSearch: return "shift-search";
    case Origin::Backward: return "backward-reconstruction";
    case Origin::Forward: return "forward-reconstruction";
    case Origin::Llm: return "llm";
    }
    return "?";
}

std::string_view to_string(Side s) noexcept { return s == Side::Antecedent ? "antecedent" : "consequent"; }

Validation validate(const SvaAssertion& a, const std::vector<CounterexampleTrace>& traces) {
    Validation v;
    v.passed = true;
    v.covered = true;
    try {
        for (const auto& t : traces) {
            auto r = trace::evaluate_assertion(a, t);
            v.passed = v.passed && r.passed();
            v.covered = v.covered && r.covered;
            v.per_trace.push_back(std::move(r));
        }
    } catch (const Error& e) {
        v.error = e.what();
        v.passed = false;
    }
    if (traces.empty()) v.passed = v.covered = false;
    if (v.error.empty() && classify::tautological(a)) {
        v.error = "consequent restates the antecedent";
        v.passed = false;
    }
    return v;
}

bool one_sided(const SvaAssertion& a, const SvaAssertion& b) {
    auto same = [](const ExprPtr& x, const ExprPtr& y) { return hdl::same_expr(x, y); };
    if (a.clock != b.clock || !same(a.disable, b.disable)) return false;
    bool ante = !same(a.antecedent, b.antecedent);
    bool cons = a.implication != b.implication || a.consequent.size() != b.consequent.size();
    for (std::size_t i = 0; !cons && i < a.consequent.size(); ++i) {
        cons = a.consequent[i].delay != b.consequent[i].delay || !same(a.consequent[i].expr, b.consequent[i].expr);
    }
    return ante != cons;
}

// ---- prompts --------------------------------------------------------------

namespace {

const char* kFixSystem =
    "You are a formal verification expert. You repair SystemVerilog assertions so that they hold on golden RTL.";

void describe_context(std::ostringstream& u, const SvaAssertion& a, const std::vector<CounterexampleTrace>& traces,
                      const std::vector<retrieval::RtlChunk>& chunks, const cdfg::DesignCdfg* g) {
    u << "Failing assertion:\n" << hdl::render_assertion(a) << "\n\n";
    auto signals = classify::waveform_signals(a, g);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        int focus = 0;
        try {
            auto r = trace::evaluate_assertion(a, traces[i]);
            if (r.first_failure) focus = *r.first_failure;
        } catch (const Error&) {
        }
        auto [first, count] = classify::waveform_window(static_cast<int>(traces[i].length()), focus);
        u << "Counterexample " << i + 1 << " (first failing attempt at cycle " << focus << "):\n"
          << classify::waveform_table(traces[i], signals, first, count) << "\n";
    }
    u << "Relevant RTL:\n";
    for (const auto& c : chunks) u << "[chunk " << c.id << "] module " << c.module << "\n" << c.numbered_text() << "\n\n";
}

} // namespace

llm::Prompt build_timing_prompt(const SvaAssertion& a, const std::vector<CounterexampleTrace>& traces,
                                const std::vector<retrieval::RtlChunk>& chunks, const cdfg::DesignCdfg* g) {
    std::ostringstream u;
    describe_context(u, a, traces, chunks, g);
    u << "The assertion has a timing error. Simulate the signals cycle by cycle within the RTL above, starting from a "
         "cycle where the antecedent holds, and find the cycle at which the consequent actually becomes true. Keep "
         "the antecedent and the consequent conditions; change only the delays.\n"
         "Give the corrected assertion inside <assertion></assertion>.";
    return llm::Prompt{kFixSystem, u.str()};
}

llm::Prompt build_logic_prompt(const SvaAssertion& a, const std::vector<CounterexampleTrace>& traces,
                               const std::vector<retrieval::RtlChunk>& chunks, const cdfg::DesignCdfg* g) {
    std::ostringstream u;
    describe_context(u, a, traces, chunks, g);
    u << "The assertion has a logic error. Repair it in two independent ways.\n"
         "1. Backward: assume the consequent is correct. Find the RTL conditions under which the consequent's "
         "signals are assigned as the consequent states, and rebuild the antecedent from them.\n"
         "2. Forward: assume the antecedent is correct. Follow its effect through the RTL and rebuild the "
         "consequent from the assignments it triggers, with the matching delay.\n"
         "Give each corrected assertion inside its own <assertion></assertion>.";
    return llm::Prompt{kFixSystem, u.str()};
}

std::vector<SvaAssertion> parse_proposals(const std::string& text, std::vector<std::string>* notes) {
    std::vector<SvaAssertion> out;
    for (const auto& body : llm::extract_tags(text, "assertion")) {
        try {
            out.push_back(hdl::parse_assertion(body));
        } catch (const Error& e) {
            if (notes) notes->push_back("unparsable proposal '" + body + "': " + e.what());
        }
    }
    return out;
}

// ---- timing ---------------------------------------------------------------

namespace {

void require_failure(const SvaAssertion& a, const std::vector<CounterexampleTrace>& traces) {
    if (traces.empty()) throw NoTraces();
    for (const auto& t : traces) {
        if (!trace::evaluate_assertion(a, t).passed()) return;
    }
    throw NoFailure();
}

bool try_candidate(FixOutcome& out, FixCandidate c, const std::vector<CounterexampleTrace>& traces) {
    auto v = validate(c.assertion, traces);
    bool ok = v.accepted();
    out.candidates.push_back(std::move(c));
    out.validations.push_back(std::move(v));
    if (ok) {
        out.accepted = out.candidates.size() - 1;
        out.status = FixStatus::Fixed;
    }
    return ok;
}

// Proposals often drop the label and clock of the original.
void inherit_header(SvaAssertion& p, const SvaAssertion& a) {
    if (!p.name) p.name = a.name;
    if (!p.clock) p.clock = a.clock;
    if (!p.disable) p.disable = a.disable;
}

std::string render_cons(const SvaAssertion& a) {
    SvaAssertion c = a;
    c.antecedent = nullptr;
    c.disable = nullptr;
    c.clock.reset();
    c.name.reset();
    std::string s = hdl::render_property(c);
    return std::string(a.implication == hdl::Implication::Overlapped ? "|-> " : "|=> ") + s;
}

} // namespace

FixOutcome fix_timing(const SvaAssertion& a, const std::vector<CounterexampleTrace>& traces,
                      const std::vector<retrieval::RtlChunk>& chunks, llm::LlmClient* llm, int shift_bound,
                      const cdfg::DesignCdfg* g) {
    require_failure(a, traces);
    FixOutcome out;
    out.classification.kind = classify::ErrorKind::Timing;
    if (llm) {
        auto prompt = build_timing_prompt(a, traces, chunks, g);
        out.prompts.push_back(prompt);
        try {
            auto resp = llm->complete(prompt);
            for (auto& p : parse_proposals(resp.text, &out.notes)) {
                if (out.candidates.size() >= kCandidateCap) break;
                inherit_header(p, a);
                FixCandidate c{p, Origin::Llm, Side::Consequent, render_cons(a), render_cons(p), false, std::nullopt};
                if (try_candidate(out, std::move(c), traces)) return out;
            }
        } catch (const LlmBackendError& e) {
            out.notes.push_back(std::string("llm unavailable: ") + e.what());
        }
    }
    for (int k : classify::shift_order(shift_bound)) {
        SvaAssertion shifted;
        try {
            shifted = trace::shift_consequent(a, k);
        } catch (const UnrepresentableShift& e) {
            out.notes.push_back("shift " + std::to_string(k) + " unrepresentable");
            continue;
        }
        FixCandidate c{shifted, Origin::ShiftSearch, Side::Consequent, render_cons(a), render_cons(shifted), false, k};
        if (try_candidate(out, std::move(c), traces)) return out;
    }
    return out;
}

// ---- reconstruction helpers ---------------------------------------------

namespace {

/// Push `$past` to the leaves and add `extra` cycles of delay.
ExprPtr push_past(const ExprPtr& e, int extra) {
    if (!e) return e;
    switch (e->kind) {
    case ExprKind::Identifier: return extra > 0 ? hdl::make_past(e, extra) : e;
    case ExprKind::Constant: return e;
    case ExprKind::SystemCall:
        if (e->is_past()) return push_past(e->operands[0], extra + e->amount);
        return extra > 0 ? hdl::make_past(e, extra) : e;
    default: break;
    }
    if (e->kind == ExprKind::BitSelect || e->kind == ExprKind::PartSelect) {
        if (e->operands[0]->is_identifier() && (e->kind == ExprKind::PartSelect || e->operands[1]->is_constant())) {
            return extra > 0 ? hdl::make_past(e, extra) : e;
        }
    }
    auto copy = std::make_shared<Expr>(*e);
    for (auto& op : copy->operands) op = push_past(op, extra);
    return copy;
}

std::set<std::pair<std::string, int>> timed_signals(const ExprPtr& e, int extra) {
    std::set<std::pair<std::string, int>> out;
    std::function<void(const Expr&, int)> walk = [&](const Expr& x, int d) {
        if (x.is_identifier()) {
            out.emplace(x.name, d);
            return;
        }
        int nd = x.is_past() ? d + x.amount : d;
        for (const auto& op : x.operands) walk(*op, nd);
    };
    walk(*e, extra);
    return out;
}

/// The side of an equality conjunct in `expr` facing `lhs` (or the target).
ExprPtr relation_side(const ExprPtr& expr, const cdfg::GuardedAssignment& d) {
    for (const auto& c : hdl::conjuncts(expr)) {
        if (c->kind != ExprKind::Binary) continue;
        if (c->binary_op != hdl::BinaryOp::Eq && c->binary_op != hdl::BinaryOp::CaseEq) continue;
        const auto& l = c->operands[0];
        const auto& r = c->operands[1];
        auto is_target = [&](const ExprPtr& x) {
            return hdl::same_expr(x, d.lhs) || (x->is_identifier() && x->name == d.target && d.lhs->is_identifier());
        };
        if (is_target(l)) return r;
        if (is_target(r)) return l;
    }
    return nullptr;
}

bool relation_matches(const ExprPtr& other, const cdfg::GuardedAssignment& d, int offset) {
    if (!other || !d.rhs) return false;
    if (hdl::same_expr(push_past(other, 0), push_past(d.rhs, offset))) return true;
    auto want = timed_signals(d.rhs, offset);
    if (want.empty()) {
        auto x = hdl::fold_constant(*other);
        auto y = hdl::fold_constant(*d.rhs);
        return x && y && *x == *y;
    }
    return timed_signals(other, 0) == want;
}

/// Replace constants in `ante` that conflict with the guard's pinned values.
ExprPtr patch_constants(const ExprPtr& ante, const std::vector<cdfg::Constraint>& guard) {
    auto pinned = [&](const std::string& s) -> std::optional<std::uint64_t> {
        for (const auto& g : guard) {
            if (g.signal == s && g.op == cdfg::Constraint::Op::Eq) return g.value;
        }
        return std::nullopt;
    };
    return hdl::transform(ante, [&](const ExprPtr& x) -> ExprPtr {
        auto k = cdfg::as_constraint(x);
        if (!k || k->op != cdfg::Constraint::Op::Eq) return nullptr;
        auto v = pinned(k->signal);
        if (!v || *v == k->value) return nullptr;
        if (x->is_identifier()) return *v == 0 ? hdl::make_unary(hdl::UnaryOp::LogNot, x) : nullptr;
        if (x->kind == ExprKind::Unary) return *v == 1 ? x->operands[0] : nullptr;
        auto copy = std::make_shared<Expr>(*x);
        int ci = x->operands[0]->is_constant() ? 0 : 1;
        auto c = x->operands[static_cast<std::size_t>(ci)]->constant;
        c.value = *v & hdl::width_mask(c.width);
        copy->operands[static_cast<std::size_t>(ci)] = hdl::make_constant(c);
        return copy;
    });
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string render_or_empty(const ExprPtr& e) { return e ? hdl::render_expr(*e) : ""; }

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& s : a) n += b.count(s);
    return n;
}

std::set<std::string> signals_of(const ExprPtr& e) { return e ? hdl::collect_signals(*e) : std::set<std::string>{}; }

void push_unique(std::vector<FixCandidate>& out, FixCandidate c) {
    for (const auto& x : out) {
        if (x.assertion == c.assertion) return;
    }
    out.push_back(std::move(c));
}

} // namespace

std::vector<FixCandidate> backward_reconstruct(const SvaAssertion& a, const cdfg::DesignCdfg& g,
                                               const std::vector<retrieval::RtlChunk>&) {
    struct Ranked {
        FixCandidate c;
        std::size_t overlap;
        std::size_t edit;
    };
    std::vector<Ranked> ranked;
    bool any_driver = false;
    const auto orig_sigs = signals_of(a.antecedent);
    const auto orig_text = render_or_empty(a.antecedent);
    auto add = [&](ExprPtr ante, bool low) {
        SvaAssertion cand = a;
        cand.antecedent = std::move(ante);
        std::string after = render_or_empty(cand.antecedent);
        FixCandidate c{cand, Origin::Backward, Side::Antecedent, orig_text, after, low, std::nullopt};
        ranked.push_back(Ranked{std::move(c), overlap(signals_of(cand.antecedent), orig_sigs), edit_distance(after, orig_text)});
    };
    for (std::size_t j = 0; j < a.consequent.size(); ++j) {
        const int offset = a.step_offset(j);
        std::set<std::string> now, past;
        hdl::collect_signals_by_time(*a.consequent[j].expr, now, past);
        for (const auto& t : now) {
            if (!g.has(t)) continue;
            auto drivers = cdfg::guard_conditions(g, t);
            any_driver = any_driver || !drivers.empty();
            for (const auto& d : drivers) {
                int depth = d.timing == cdfg::Timing::Sequential ? 1 : 0;
                if (depth != offset) continue;
                if (!relation_matches(relation_side(a.consequent[j].expr, d), d, offset)) continue;
                if (d.guard.empty()) {
                    add(a.antecedent, true);
                    continue;
                }
                if (a.antecedent) {
                    auto patched = patch_constants(a.antecedent, cdfg::constraints_of(d.guard));
                    if (!hdl::same_expr(patched, a.antecedent)) add(patched, false);
                }
                add(d.guard_expr(), false);
            }
        }
    }
    if (!any_driver) throw NoDriversFound("no RTL driver for any consequent signal");
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
        if (x.overlap != y.overlap) return x.overlap > y.overlap;
        return x.edit < y.edit;
    });
    std::vector<FixCandidate> out;
    for (auto& r : ranked) push_unique(out, std::move(r.c));
    return out;
}

std::vector<FixCandidate> forward_reconstruct(const SvaAssertion& a, const cdfg::DesignCdfg& g,
                                              const std::vector<retrieval::RtlChunk>&, int depth_cap) {
    if (!a.antecedent) throw NoForwardTargets("assertion has no antecedent");
    std::set<std::string> seeds;
    for (const auto& s : a.antecedent_signals()) {
        if (g.has(s)) seeds.insert(s);
    }
    if (seeds.empty()) throw NoForwardTargets("antecedent signals are not in the design");
    const auto premises = hdl::conjuncts(a.antecedent);
    const auto ante_cons = cdfg::constraints_of({a.antecedent});
    const auto cone = cdfg::cone_of_influence(g, seeds, cdfg::Direction::Forward, depth_cap);
    const auto orig_cons = a.consequent_signals();
    const std::string orig_text = render_cons(a);

    struct Ranked {
        FixCandidate c;
        std::size_t overlap;
    };
    std::vector<Ranked> ranked;
    for (const auto& ga : g.assignments()) {
        if (ga.target.find('.') != std::string::npos || !cone.count(ga.target) || ga.guard.empty() || !ga.rhs) continue;
        bool implied_any = false;
        bool ok = true;
        for (const auto& term : ga.guard) {
            if (cdfg::implies(premises, term)) {
                implied_any = true;
                continue;
            }
            for (const auto& s : hdl::collect_signals(*term)) {
                if (seeds.count(s)) ok = false;
            }
        }
        if (!ok || !implied_any || cdfg::contradicts(ante_cons, cdfg::constraints_of(ga.guard))) continue;
        int depth = ga.timing == cdfg::Timing::Sequential ? 1 : 0;
        auto rel = hdl::make_binary(hdl::BinaryOp::Eq, ga.lhs, push_past(ga.rhs, depth));
        SvaAssertion cand = a;
        cand.consequent = {hdl::SequenceStep{depth, rel}};
        if (a.implication == hdl::Implication::NonOverlapped) {
            if (depth >= 1) {
                cand.consequent[0].delay = depth - 1;
            } else {
                cand.implication = hdl::Implication::Overlapped;
            }
        }
        std::size_t ov = overlap(cand.consequent_signals(), orig_cons);
        FixCandidate c{cand, Origin::Forward, Side::Consequent, orig_text, render_cons(cand), false, std::nullopt};
        ranked.push_back(Ranked{std::move(c), ov});
    }
    if (ranked.empty()) throw NoForwardTargets("antecedent implies no guarded assignment");
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) { return x.overlap > y.overlap; });
    std::vector<FixCandidate> out;
    for (auto& r : ranked) push_unique(out, std::move(r.c));
    return out;
}

FixOutcome fix_logic_bar(const SvaAssertion& a, const cdfg::DesignCdfg& g, const std::vector<CounterexampleTrace>& traces,
                         const std::vector<retrieval::RtlChunk>& chunks, llm::LlmClient* llm, std::size_t cap) {
    FixOutcome out;
    out.classification.kind = classify::ErrorKind::Logic;
    std::vector<FixCandidate> back, fwd;
    try {
        back = backward_reconstruct(a, g, chunks);
    } catch (const NoDriversFound& e) {
        out.notes.push_back(std::string("backward: ") + e.what());
    }
    try {
        fwd = forward_reconstruct(a, g, chunks);
    } catch (const NoForwardTargets& e) {
        out.notes.push_back(std::string("forward: ") + e.what());
    }
    std::vector<FixCandidate> list;
    for (std::size_t i = 0; i < std::max(back.size(), fwd.size()); ++i) {
        for (auto* side : {&back, &fwd}) {
            if (i >= side->size()) continue;
            auto& c = (*side)[i];
            if (c.assertion == a) continue;
            bool dup = std::any_of(list.begin(), list.end(), [&](const FixCandidate& x) { return x.assertion == c.assertion; });
            if (!dup && list.size() < cap) list.push_back(c);
        }
    }
    for (auto& c : list) {
        if (try_candidate(out, std::move(c), traces)) return out;
    }
    if (!llm || out.candidates.size() >= cap) return out;
    auto prompt = build_logic_prompt(a, traces, chunks, &g);
    out.prompts.push_back(prompt);
    llm::LlmResponse resp;
    try {
        resp = llm->complete(prompt);
    } catch (const LlmBackendError& e) {
        out.notes.push_back(std::string("llm unavailable: ") + e.what());
        return out;
    }
    for (auto& p : parse_proposals(resp.text, &out.notes)) {
        if (out.candidates.size() >= cap) break;
        inherit_header(p, a);
        if (p == a) continue;
        bool ante_changed = !hdl::same_expr(p.antecedent, a.antecedent);
        FixCandidate c{p, Origin::Llm, ante_changed ? Side::Antecedent : Side::Consequent,
                       ante_changed ? render_or_empty(a.antecedent) : render_cons(a),
                       ante_changed ? render_or_empty(p.antecedent) : render_cons(p), false, std::nullopt};
        if (try_candidate(out, std::move(c), traces)) return out;
    }
    return out;
}

} // namespace assertfix::fix
