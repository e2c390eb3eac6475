#pragma once

#include <optional>
#include <string>
#include <vector>

#include "assertfix/hdl/expr.hpp"

namespace assertfix::hdl {

struct ClockEvent {
    enum class Edge { Posedge, Negedge } edge = Edge::Posedge;
    std::string signal;

    friend bool operator==(const ClockEvent&, const ClockEvent&) = default;
};

enum class Implication { Overlapped, NonOverlapped }; // |->, |=>

/// `##delay expr`; the first step's delay is relative to the antecedent.
struct SequenceStep {
    int delay = 0;
    ExprPtr expr;
};

/// Concurrent assertion in the supported subset:
///   [name:] assert property (@(edge clk) [disable iff (e)] [ante |-> | |=>] ##d0 e0 ##d1 e1 ...);
struct SvaAssertion {
    std::optional<std::string> name;
    std::optional<ClockEvent> clock;
    ExprPtr disable;     // null when absent
    ExprPtr antecedent;  // null for a plain sequence property
    Implication implication = Implication::Overlapped;
    std::vector<SequenceStep> consequent;

    std::vector<int> delays() const;
    /// Offset of consequent step `j` from the antecedent cycle.
    int step_offset(std::size_t j) const;
    /// Cycles between the antecedent and the last consequent step.
    int window() const;
    /// Every signal referenced (antecedent, consequent, disable).
    std::set<std::string> signals() const;
    std::set<std::string> antecedent_signals() const;
    std::set<std::string> consequent_signals() const;

    friend bool operator==(const SvaAssertion& a, const SvaAssertion& b);
};

/// Parse one assertion. Throws SyntaxError or UnsupportedSvaFeature.
SvaAssertion parse_assertion(const std::string& text);

/// Canonical text; parse_assertion(render_assertion(a)) == a.
std::string render_assertion(const SvaAssertion& a);
/// Just the property body: `(ante) |-> ##1 (cons)`.
std::string render_property(const SvaAssertion& a);

struct NamedAssertion {
    std::string name;
    SvaAssertion assertion;
    std::string text;
};

/// Load assertions from a text file (one per line, `//` and `#` comment lines
/// skipped) or a JSON array of {"name", "text"}.
/// Unnamed assertions get `a<index>`.
std::vector<NamedAssertion> load_assertions(const std::string& path);
std::vector<NamedAssertion> parse_assertion_list(const std::string& text, bool json);

} // namespace assertfix::hdl
