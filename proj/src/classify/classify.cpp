#include "assertfix/classify/classify.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

#include "assertfix/cdfg/predicates.hpp"
#include "assertfix/error.hpp"

namespace assertfix::classify {

using trace::CounterexampleTrace;

std::string_view to_string(ErrorKind k) noexcept { return k == ErrorKind::Timing ? "Timing" : "Logic"; }

std::string_view to_string(ClassSource s) noexcept {
    switch (s) {
    case ClassSource::Heuristic: return "heuristic";
    case ClassSource::Llm: return "llm";
    case ClassSource::LlmOverridden: return "llm-overridden-by-heuristic";
    }
    return "?";
}

std::vector<int> shift_order(int bound) {
    std::vector<int> out;
    for (int m = 1; m <= bound; ++m) {
        out.push_back(m);
        out.push_back(-m);
    }
    return out;
}

bool tautological(const hdl::SvaAssertion& a) {
    if (!a.antecedent || a.consequent.size() != 1 || a.step_offset(0) != 0) return false;
    auto premises = hdl::conjuncts(a.antecedent);
    for (const auto& c : hdl::conjuncts(a.consequent[0].expr)) {
        bool found = std::any_of(premises.begin(), premises.end(), [&](const hdl::ExprPtr& p) { return hdl::same_expr(p, c); });
        if (!found) return false;
    }
    return true;
}

namespace {

bool passes_all(const hdl::SvaAssertion& a, const std::vector<CounterexampleTrace>& traces) {
    if (tautological(a)) return false;
    for (const auto& t : traces) {
        if (!trace::evaluate_assertion(a, t).passed_and_covered()) return false;
    }
    return true;
}

std::set<std::string> current_consequent_signals(const hdl::SvaAssertion& a) {
    std::set<std::string> now, past;
    for (const auto& s : a.consequent) hdl::collect_signals_by_time(*s.expr, now, past);
    return now;
}

// Drivers of `target` whose right-hand side can establish the consequent.
bool driver_compatible(const cdfg::GuardedAssignment& d, const std::string& target, const hdl::SvaAssertion& a) {
    auto others = a.consequent_signals();
    others.erase(target);
    if (!d.rhs) return false;
    auto rhs_sigs = hdl::collect_signals(*d.rhs);
    if (!others.empty()) {
        for (const auto& s : rhs_sigs) {
            if (others.count(s)) return true;
        }
        return false;
    }
    // Consequent compares the target against a constant, or tests it bare.
    auto rhs_value = hdl::fold_constant(*d.rhs);
    for (const auto& step : a.consequent) {
        for (const auto& c : hdl::conjuncts(step.expr)) {
            auto k = cdfg::as_constraint(c);
            if (!k || k->signal != target || k->op != cdfg::Constraint::Op::Eq) continue;
            return rhs_value && static_cast<std::uint64_t>(*rhs_value) == k->value;
        }
    }
    return true;
}

} // namespace

std::optional<int> find_passing_shift(const hdl::SvaAssertion& a, const std::vector<CounterexampleTrace>& traces,
                                      int bound) {
    for (int k : shift_order(bound)) {
        hdl::SvaAssertion shifted;
        try {
            shifted = trace::shift_consequent(a, k);
        } catch (const UnrepresentableShift&) {
            continue;
        }
        try {
            if (passes_all(shifted, traces)) return k;
        } catch (const SignalMissing&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<GuardMismatch> find_guard_mismatch(const hdl::SvaAssertion& a, const cdfg::DesignCdfg& g) {
    if (!a.antecedent) return std::nullopt;
    auto ante = cdfg::constraints_of({a.antecedent});
    if (ante.empty()) return std::nullopt;
    std::optional<GuardMismatch> first;
    for (const auto& target : current_consequent_signals(a)) {
        if (!g.has(target)) continue;
        for (const auto& d : cdfg::guard_conditions(g, target)) {
            if (!driver_compatible(d, target, a)) continue;
            auto guard = cdfg::constraints_of(d.guard);
            if (!cdfg::contradicts(ante, guard)) return std::nullopt; // a consistent driver exists
            if (first) continue;
            for (const auto& x : ante) {
                for (const auto& y : guard) {
                    if (first || x.signal != y.signal || x.op != cdfg::Constraint::Op::Eq ||
                        y.op != cdfg::Constraint::Op::Eq || x.value == y.value) {
                        continue;
                    }
                    first = GuardMismatch{target, x.signal, x.value, y.value, hdl::render_expr(*d.guard_expr()), d.span};
                }
            }
        }
    }
    return first;
}

std::vector<std::string> waveform_signals(const hdl::SvaAssertion& a, const cdfg::DesignCdfg* g) {
    auto own = a.signals();
    if (a.clock) own.erase(a.clock->signal);
    std::vector<std::string> out(own.begin(), own.end());
    if (!g) return out;
    std::set<std::string> seeds;
    for (const auto& s : own) {
        if (g->has(s)) seeds.insert(s);
    }
    std::set<std::string> rest;
    for (const auto& s : cdfg::cone_signals(cdfg::cone_of_influence(*g, seeds, cdfg::Direction::Backward))) {
        if (!own.count(s)) rest.insert(s);
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

std::pair<int, int> waveform_window(int length, int focus, int cap) {
    int count = std::min(length, cap);
    int first = std::max(0, focus - cap / 2);
    first = std::min(first, length - count);
    return {std::max(first, 0), count};
}

namespace {

std::string cell(const trace::Value& v) {
    if (!v.known) return "x";
    if (v.width == 1) return v.bits ? "1" : "0";
    std::ostringstream os;
    os << std::hex << v.bits;
    return os.str();
}

} // namespace

std::string waveform_table(const CounterexampleTrace& t, const std::vector<std::string>& signals, int first, int count) {
    std::vector<std::string> names;
    for (const auto& s : signals) {
        if (t.has(s)) names.push_back(s);
    }
    std::size_t name_w = 5;
    for (const auto& n : names) name_w = std::max(name_w, n.size());
    std::vector<std::vector<std::string>> cells(names.size());
    std::vector<std::size_t> col_w(static_cast<std::size_t>(count), 1);
    for (int c = 0; c < count; ++c) col_w[static_cast<std::size_t>(c)] = std::to_string(first + c).size();
    for (std::size_t r = 0; r < names.size(); ++r) {
        for (int c = 0; c < count; ++c) {
            auto s = cell(t.at(names[r], first + c));
            col_w[static_cast<std::size_t>(c)] = std::max(col_w[static_cast<std::size_t>(c)], s.size());
            cells[r].push_back(std::move(s));
        }
    }
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(name_w)) << "cycle";
    for (int c = 0; c < count; ++c) os << ' ' << std::right << std::setw(static_cast<int>(col_w[static_cast<std::size_t>(c)])) << first + c;
    os << '\n';
    for (std::size_t r = 0; r < names.size(); ++r) {
        os << std::left << std::setw(static_cast<int>(name_w)) << names[r];
        for (int c = 0; c < count; ++c) {
            os << ' ' << std::right << std::setw(static_cast<int>(col_w[static_cast<std::size_t>(c)])) << cells[r][static_cast<std::size_t>(c)];
        }
        os << '\n';
    }
    return os.str();
}

namespace {

const char* kClassifySystem =
    "You are a formal verification expert. You diagnose why a SystemVerilog assertion fails against golden RTL.";

} // namespace

llm::Prompt build_classification_prompt(const hdl::SvaAssertion& a, const std::vector<CounterexampleTrace>& traces,
                                        const std::vector<retrieval::RtlChunk>& chunks, const cdfg::DesignCdfg* g) {
    std::ostringstream u;
    u << "Failing assertion:\n" << hdl::render_assertion(a) << "\n\n";
    auto signals = waveform_signals(a, g);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        int focus = 0;
        try {
            auto r = trace::evaluate_assertion(a, t);
            if (r.first_failure) focus = *r.first_failure;
        } catch (const Error&) {
        }
        auto [first, count] = waveform_window(static_cast<int>(t.length()), focus);
        u << "Counterexample " << i + 1 << " (first failing attempt at cycle " << focus << ", cycles " << first << "-"
          << first + count - 1 << "):\n"
          << waveform_table(t, signals, first, count) << "\n";
    }
    u << "Relevant RTL:\n";
    for (const auto& c : chunks) {
        u << "[chunk " << c.id << "] module " << c.module << ", " << c.file << " lines " << c.start_line << "-" << c.end_line
          << "\n"
          << c.numbered_text() << "\n\n";
    }
    u << "The RTL is correct; only the assertion may be wrong. Compare the assertion with the RTL first and use the "
         "waveform only as supporting evidence, since a waveform can make a wrong condition look like a delay.\n"
         "Is this a timing error (signals sampled cycles too early or late) or a logic error (wrong condition or "
         "relation)? Reason briefly, then answer with <answer>Timing</answer> or <answer>Logic</answer>.";
    return llm::Prompt{kClassifySystem, u.str()};
}

std::optional<ErrorKind> parse_classification_answer(const std::string& text) {
    auto tag = llm::extract_tag(text, "answer");
    if (!tag) return std::nullopt;
    std::string s = *tag;
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (s == "timing") return ErrorKind::Timing;
    if (s == "logic") return ErrorKind::Logic;
    return std::nullopt;
}

ErrorClassification classify_error(const hdl::SvaAssertion& a, const std::vector<CounterexampleTrace>& traces,
                                   const std::vector<retrieval::RtlChunk>& chunks, const cdfg::DesignCdfg& g,
                                   llm::LlmClient* llm, int shift_bound) {
    if (traces.empty()) throw NoTraces();
    if (shift_bound < 1) throw ConfigError("shift bound must be >= 1");
    bool any_fail = false;
    for (const auto& t : traces) any_fail = any_fail || !trace::evaluate_assertion(a, t).passed();
    if (!any_fail) throw NoFailure();

    ErrorClassification h;
    h.mismatch = find_guard_mismatch(a, g);
    std::optional<int> k;
    if (h.mismatch) {
        h.kind = ErrorKind::Logic;
        h.rationale = "driver of " + h.mismatch->target + " is guarded by " + h.mismatch->guard + " but the antecedent pins " +
                      h.mismatch->signal + " to " + std::to_string(h.mismatch->antecedent_value);
    } else {
        k = find_passing_shift(a, traces, shift_bound);
        if (k) {
            h.kind = ErrorKind::Timing;
            h.shift = k;
            h.rationale = "shifting the consequent by " + std::to_string(*k) + " passes and covers every trace";
        } else {
            h.kind = ErrorKind::Logic;
            h.rationale = "no shift within +-" + std::to_string(shift_bound) + " passes every trace";
        }
    }
    if (!llm) return h;

    llm::LlmResponse resp;
    try {
        resp = llm->complete(build_classification_prompt(a, traces, chunks, &g));
    } catch (const LlmBackendError& e) {
        h.rationale += "; llm unavailable: " + std::string(e.what());
        return h;
    }
    auto answer = parse_classification_answer(resp.text);
    if (!answer) {
        h.rationale += "; llm answer unparsable";
        h.llm_answer = resp.text;
        return h;
    }
    ErrorClassification out = h;
    out.llm_answer = resp.text;
    if (*answer == ErrorKind::Logic) {
        out.kind = ErrorKind::Logic;
        out.shift.reset();
        out.source = ClassSource::Llm;
        out.rationale = "llm: Logic; heuristic: " + std::string(to_string(h.kind)) + " (" + h.rationale + ")";
        return out;
    }
    if (h.kind == ErrorKind::Timing) {
        out.source = ClassSource::Llm;
        out.rationale = "llm: Timing; " + h.rationale;
        return out;
    }
    out.source = ClassSource::LlmOverridden;
    out.rationale = "llm: Timing overridden; " + h.rationale;
    return out;
}

} // namespace assertfix::classify
