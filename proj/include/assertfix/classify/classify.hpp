#pragma once

#include <optional>
#include <string>
#include <vector>

#include "assertfix/cdfg/cdfg.hpp"
#include "assertfix/hdl/sva.hpp"
#include "assertfix/llm/client.hpp"
#include "assertfix/retrieval/retrieval.hpp"
#include "assertfix/trace/trace.hpp"

namespace assertfix::classify {

enum class ErrorKind { Timing, Logic };
enum class ClassSource { Heuristic, Llm, LlmOverridden };

std::string_view to_string(ErrorKind k) noexcept;
std::string_view to_string(ClassSource s) noexcept;

/// An RTL driver of a consequent signal whose guard pins a signal to a
/// constant the antecedent contradicts.
struct GuardMismatch {
    std::string target;          // consequent signal
    std::string signal;          // signal compared in both
    std::uint64_t antecedent_value = 0;
    std::uint64_t guard_value = 0;
    std::string guard;           // rendered guard conjunction
    hdl::SourceSpan span;        // the driving assignment
};

struct ErrorClassification {
    ErrorKind kind = ErrorKind::Logic;
    std::optional<int> shift;             // Timing: passing shift k != 0
    std::optional<GuardMismatch> mismatch; // Logic: the guard evidence, when found
    ClassSource source = ClassSource::Heuristic;
    std::string rationale;
    std::string llm_answer; // raw reply on the LLM path
};

/// Consequent is checked in the antecedent's own cycle and restates antecedent conjuncts.
bool tautological(const hdl::SvaAssertion& a);

/// Shifts 1, -1, 2, -2, ... up to |k| <= bound.
std::vector<int> shift_order(int bound);

/// Smallest-|k| shift (positive first) under which the assertion passes and
/// is covered on every trace.
std::optional<int> find_passing_shift(const hdl::SvaAssertion& a, const std::vector<trace::CounterexampleTrace>& traces,
                                      int bound);

/// Among drivers of the consequent signals whose right-hand side reads a
/// signal the consequent compares against, none has a guard the antecedent
/// implies and at least one has a guard the antecedent contradicts.
std::optional<GuardMismatch> find_guard_mismatch(const hdl::SvaAssertion& a, const cdfg::DesignCdfg& g);

/// Signals that go into the waveform table: assertion signals first, then the
/// rest of their backward cone, each group sorted.
std::vector<std::string> waveform_signals(const hdl::SvaAssertion& a, const cdfg::DesignCdfg* g);

/// Fixed-width table, one row per signal, columns are cycles in
/// [first, first + count).
std::string waveform_table(const trace::CounterexampleTrace& t, const std::vector<std::string>& signals, int first,
                           int count);

/// Window of at most `cap` cycles centred on `focus`, clipped to the trace.
std::pair<int, int> waveform_window(int length, int focus, int cap = 32);

llm::Prompt build_classification_prompt(const hdl::SvaAssertion& a, const std::vector<trace::CounterexampleTrace>& traces,
                                        const std::vector<retrieval::RtlChunk>& chunks,
                                        const cdfg::DesignCdfg* g = nullptr);

/// Parse `<answer>Timing|Logic</answer>` (case-insensitive).
std::optional<ErrorKind> parse_classification_answer(const std::string& text);

/// Heuristic classification, optionally consulting `llm` first. Throws
/// NoTraces, NoFailure; FixtureMiss and MockUnmatched propagate, an
/// LlmBackendError falls back to the heuristic.
ErrorClassification classify_error(const hdl::SvaAssertion& a, const std::vector<trace::CounterexampleTrace>& traces,
                                   const std::vector<retrieval::RtlChunk>& chunks, const cdfg::DesignCdfg& g,
                                   llm::LlmClient* llm = nullptr, int shift_bound = 3);

} // namespace assertfix::classify
