#pragma once

#include <optional>
#include <string>
#include <vector>

#include "assertfix/cdfg/cdfg.hpp"
#include "assertfix/classify/classify.hpp"
#include "assertfix/hdl/sva.hpp"
#include "assertfix/llm/client.hpp"
#include "assertfix/retrieval/retrieval.hpp"
#include "assertfix/trace/trace.hpp"

namespace assertfix::fix {

enum class Origin { ShiftSearch, Backward, Forward, Llm };
enum class Side { Antecedent, Consequent };

std::string_view to_string(Origin o) noexcept;
std::string_view to_string(Side s) noexcept;

struct FixCandidate {
    hdl::SvaAssertion assertion;
    Origin origin = Origin::ShiftSearch;
    Side side = Side::Consequent;
    std::string before; // replaced fragment
    std::string after;
    bool low_confidence = false;
    std::optional<int> shift; // ShiftSearch
};

struct Validation {
    std::vector<trace::EvalResult> per_trace;
    bool passed = false;  // every trace passes
    bool covered = false; // every trace has a non-vacuous attempt
    std::string error;    // evaluation error, if any

    bool accepted() const noexcept { return passed && covered && error.empty(); }
};

enum class FixStatus { Fixed, Unfixed };

struct FixOutcome {
    classify::ErrorClassification classification;
    std::vector<FixCandidate> candidates; // in the order tried
    std::vector<Validation> validations;  // parallel to candidates
    std::optional<std::size_t> accepted;
    FixStatus status = FixStatus::Unfixed;
    std::vector<std::string> notes;
    std::vector<llm::Prompt> prompts; // prompts sent, for artifact dumps

    const FixCandidate* accepted_candidate() const { return accepted ? &candidates[*accepted] : nullptr; }
};

constexpr std::size_t kCandidateCap = 16;

/// Check a candidate on every trace.
Validation validate(const hdl::SvaAssertion& a, const std::vector<trace::CounterexampleTrace>& traces);

llm::Prompt build_timing_prompt(const hdl::SvaAssertion& a, const std::vector<trace::CounterexampleTrace>& traces,
                                const std::vector<retrieval::RtlChunk>& chunks, const cdfg::DesignCdfg* g = nullptr);
llm::Prompt build_logic_prompt(const hdl::SvaAssertion& a, const std::vector<trace::CounterexampleTrace>& traces,
                               const std::vector<retrieval::RtlChunk>& chunks, const cdfg::DesignCdfg* g = nullptr);

/// Assertions inside `<assertion>` tags that parse; others are reported in `notes`.
std::vector<hdl::SvaAssertion> parse_proposals(const std::string& text, std::vector<std::string>* notes = nullptr);

/// LLM proposal first (if any), then shifts ordered by |k|, positive first.
/// Throws NoFailure when no trace fails.
FixOutcome fix_timing(const hdl::SvaAssertion& a, const std::vector<trace::CounterexampleTrace>& traces,
                      const std::vector<retrieval::RtlChunk>& chunks, llm::LlmClient* llm = nullptr, int shift_bound = 3,
                      const cdfg::DesignCdfg* g = nullptr);

/// Keep the consequent, rebuild the antecedent from the guards of drivers
/// whose right-hand side establishes the consequent at its delay. Throws
/// NoDriversFound.
std::vector<FixCandidate> backward_reconstruct(const hdl::SvaAssertion& a, const cdfg::DesignCdfg& g,
                                               const std::vector<retrieval::RtlChunk>& chunks = {});

/// Keep the antecedent, rebuild the consequent from assignments reachable
/// forward whose guards the antecedent implies. Throws NoForwardTargets.
std::vector<FixCandidate> forward_reconstruct(const hdl::SvaAssertion& a, const cdfg::DesignCdfg& g,
                                              const std::vector<retrieval::RtlChunk>& chunks = {}, int depth_cap = 8);

/// Interleaved backward/forward candidates, then LLM proposals, validated in
/// order until one passes and is covered on every trace.
FixOutcome fix_logic_bar(const hdl::SvaAssertion& a, const cdfg::DesignCdfg& g,
                         const std::vector<trace::CounterexampleTrace>& traces,
                         const std::vector<retrieval::RtlChunk>& chunks, llm::LlmClient* llm = nullptr,
                         std::size_t cap = kCandidateCap);

/// True when `b` differs from `a` on exactly one side.
bool one_sided(const hdl::SvaAssertion& a, const hdl::SvaAssertion& b);

} // namespace assertfix::fix
