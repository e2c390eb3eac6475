#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "assertfix/hdl/sva.hpp"
#include "assertfix/trace/value.hpp"

namespace assertfix::trace {

struct TraceSignal {
    std::string name;   // leaf reference as declared by $var
    std::string path;   // dotted scope path, e.g. "tb.dut.wb_dat_o"
    std::string id;     // VCD identifier code ("" for traces built in memory)
    std::uint32_t width = 1;
    int lsb = 0;
    std::vector<Value> values; // one per sampled clock edge
};

/// Per-signal values sampled at the clock's active edges, indexed 0..N-1.
class CounterexampleTrace : public ValueSource {
public:
    CounterexampleTrace() = default;
    CounterexampleTrace(std::string clock, std::size_t length);

    const std::string& clock() const noexcept { return clock_; }
    std::size_t length() const noexcept { return length_; }
    const std::vector<TraceSignal>& signals() const noexcept { return signals_; }

    /// Append a signal; `values.size()` must equal length().
    void add_signal(TraceSignal s);
    /// Lookup by dotted path first, then by leaf name (first declared wins).
    const TraceSignal* find(const std::string& name) const;
    bool has(const std::string& name) const { return find(name) != nullptr; }

    std::uint32_t width(const std::string& name) const override;
    int lsb(const std::string& name) const override;
    Value at(const std::string& name, int cycle) const override;

    /// Same clock, length, and per-name widths and values.
    friend bool operator==(const CounterexampleTrace& a, const CounterexampleTrace& b);

private:
    std::string clock_;
    std::size_t length_ = 0;
    std::vector<TraceSignal> signals_;
    std::map<std::string, std::size_t> by_path_;
    std::map<std::string, std::size_t> by_leaf_;
};

enum class ClockEdge { Rising, Falling };

/// Parse VCD text and sample every signal at the clock's active edges. All
/// changes at a timestamp are applied before the edge is detected and the
/// sample taken. The clock itself is not part of the sampled signal set.
CounterexampleTrace parse_vcd(const std::string& text, const std::string& clock, ClockEdge edge = ClockEdge::Rising);
CounterexampleTrace parse_vcd_file(const std::string& path, const std::string& clock,
                                   ClockEdge edge = ClockEdge::Rising);

/// Serialize with `$timescale 1ns`, one scope `top`, a 10ns clock period.
/// Cycle c's values change together with the rising edge at 10c+5.
std::string write_vcd(const CounterexampleTrace& t);

enum class Verdict { Pass, Fail, Vacuous };

std::string_view to_string(Verdict v) noexcept;

struct Attempt {
    int start = 0;
    Verdict verdict = Verdict::Vacuous;
};

struct EvalResult {
    std::vector<Attempt> attempts;
    Verdict overall = Verdict::Pass; // Pass or Fail
    bool covered = false;
    std::optional<int> first_failure;

    bool passed() const noexcept { return overall == Verdict::Pass; }
    /// Passed with at least one non-vacuous attempt.
    bool passed_and_covered() const noexcept { return passed() && covered; }
};

/// Bounded evaluation at every start cycle. Unknown antecedent is vacuous,
/// unknown consequent fails. An attempt whose window runs past the trace end,
/// or during whose window the disable condition is true, is vacuous.
EvalResult evaluate_assertion(const hdl::SvaAssertion& a, const CounterexampleTrace& t);

/// Move the consequent by `k` cycles relative to the antecedent. A negative
/// shift larger than the first delay is absorbed by deepening every `$past`.
hdl::SvaAssertion shift_consequent(const hdl::SvaAssertion& a, int k);

} // namespace assertfix::trace
