#include "assertfix/trace/trace.hpp"

#include "assertfix/error.hpp"

namespace assertfix::trace {

CounterexampleTrace::CounterexampleTrace(std::string clock, std::size_t length)
    : clock_(std::move(clock)), length_(length) {}

void CounterexampleTrace::add_signal(TraceSignal s) {
    if (s.values.size() != length_) {
        throw Error("signal '" + s.name + "' has " + std::to_string(s.values.size()) + " samples, trace has " +
                    std::to_string(length_));
    }
    if (s.path.empty()) s.path = s.name;
    if (by_path_.count(s.path)) throw Error("duplicate trace signal '" + s.path + "'");
    std::size_t idx = signals_.size();
    by_path_[s.path] = idx;
    by_leaf_.emplace(s.name, idx);
    signals_.push_back(std::move(s));
}

const TraceSignal* CounterexampleTrace::find(const std::string& name) const {
    auto it = by_path_.find(name);
    if (it != by_path_.end()) return &signals_[it->second];
    it = by_leaf_.find(name);
    if (it != by_leaf_.end()) return &signals_[it->second];
    return nullptr;
}

std::uint32_t CounterexampleTrace::width(const std::string& name) const {
    const TraceSignal* s = find(name);
    if (!s) throw SignalMissing(name);
    return s->width;
}

int CounterexampleTrace::lsb(const std::string& name) const {
    const TraceSignal* s = find(name);
    return s ? s->lsb : 0;
}

Value CounterexampleTrace::at(const std::string& name, int cycle) const {
    const TraceSignal* s = find(name);
    if (!s) throw SignalMissing(name);
    if (cycle < 0 || static_cast<std::size_t>(cycle) >= length_) return Value::unknown(s->width);
    return s->values[static_cast<std::size_t>(cycle)];
}

bool operator==(const CounterexampleTrace& a, const CounterexampleTrace& b) {
    if (a.clock_ != b.clock_ || a.length_ != b.length_ || a.signals_.size() != b.signals_.size()) return false;
    for (const auto& s : a.signals_) {
        const TraceSignal* o = b.find(s.name);
        if (!o || o->width != s.width || o->lsb != s.lsb || o->values != s.values) return false;
    }
    return true;
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Vacuous: return "vacuous";
    }
    return "?";
}

EvalResult evaluate_assertion(const hdl::SvaAssertion& a, const CounterexampleTrace& t) {
    for (const auto& name : a.signals()) {
        const TraceSignal* s = t.find(name);
        if (!s) throw SignalMissing(name);
        if (s->width > 64) throw WidthMismatch("signal '" + name + "' is wider than 64 bits");
    }
    EvalResult r;
    const int n = static_cast<int>(t.length());
    const int window = a.window();
    for (int i = 0; i < n; ++i) {
        Attempt att{i, Verdict::Vacuous};
        r.attempts.push_back(att);
        if (i + window > n - 1) continue;
        if (a.disable) {
            bool disabled = false;
            for (int j = i; j <= i + window && !disabled; ++j) {
                auto d = evaluate_expr(*a.disable, t, j).truth();
                disabled = d && *d;
            }
            if (disabled) continue;
        }
        if (a.antecedent) {
            auto ante = evaluate_expr(*a.antecedent, t, i).truth();
            if (!ante || !*ante) continue;
        }
        Verdict v = Verdict::Pass;
        for (std::size_t j = 0; j < a.consequent.size(); ++j) {
            auto c = evaluate_expr(*a.consequent[j].expr, t, i + a.step_offset(j)).truth();
            if (!c || !*c) {
                v = Verdict::Fail;
                break;
            }
        }
        r.attempts.back().verdict = v;
        r.covered = true;
        if (v == Verdict::Fail) {
            r.overall = Verdict::Fail;
            if (!r.first_failure) r.first_failure = i;
        }
    }
    return r;
}

hdl::SvaAssertion shift_consequent(const hdl::SvaAssertion& a, int k) {
    if (k == 0) return a;
    if (a.consequent.empty()) throw UnrepresentableShift("assertion has no consequent");
    hdl::SvaAssertion out = a;
    const bool non_overlapped = a.antecedent && a.implication == hdl::Implication::NonOverlapped;
    const int offset = a.consequent[0].delay + (non_overlapped ? 1 : 0);
    const int target = offset + k;
    if (target >= 0) {
        if (non_overlapped && target >= 1) {
            out.consequent[0].delay = target - 1;
        } else {
            out.implication = hdl::Implication::Overlapped;
            out.consequent[0].delay = target;
        }
        return out;
    }
    // Shortfall: push every sampled history further into the past.
    const int shortfall = -target;
    bool any_past = false;
    for (auto& step : out.consequent) {
        step.expr = hdl::transform(step.expr, [&](const hdl::ExprPtr& e) -> hdl::ExprPtr {
            if (!e->is_past()) return nullptr;
            any_past = true;
            return hdl::make_past(e->operands[0], e->amount + shortfall, e->span);
        });
    }
    if (!any_past) {
        throw UnrepresentableShift("shift by " + std::to_string(k) + " needs the consequent " +
                                   std::to_string(shortfall) + " cycle(s) before the antecedent and it has no $past");
    }
    out.implication = hdl::Implication::Overlapped;
    out.consequent[0].delay = 0;
    return out;
}

} // namespace assertfix::trace
