#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "assertfix/hdl/design.hpp"

namespace assertfix::cdfg {

enum class EdgeKind { Data, Control };
enum class Timing { Combinational, Sequential };

std::string_view to_string(EdgeKind k) noexcept;
std::string_view to_string(Timing t) noexcept;

struct Node {
    std::string name;   // hierarchical: "txr" in the top module, "u_regs.txr" below it
    std::string module; // defining module
    std::uint32_t width = 1;
};

struct Edge {
    std::size_t src = 0;
    std::size_t dst = 0;
    EdgeKind kind = EdgeKind::Data;
    Timing timing = Timing::Combinational;
    hdl::SourceSpan span;
};

/// One assignment to `target` together with the control predicates that
/// must hold for it to execute. Expressions use hierarchical names.
struct GuardedAssignment {
    std::string target;
    hdl::ExprPtr lhs;
    hdl::ExprPtr rhs;
    std::vector<hdl::ExprPtr> guard; // conjunction; empty means unconditional
    Timing timing = Timing::Combinational;
    hdl::SourceSpan span;

    hdl::ExprPtr guard_expr() const { return hdl::make_conjunction(guard); }
};

class DesignCdfg {
public:
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<GuardedAssignment>& assignments() const noexcept { return assignments_; }
    const std::string& top() const noexcept { return top_; }

    std::optional<std::size_t> find(const std::string& name) const;
    bool has(const std::string& name) const { return find(name).has_value(); }
    /// Index of `name`; throws UnknownSignal.
    std::size_t index(const std::string& name) const;

    const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_[node]; }
    const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_[node]; }

private:
    friend class CdfgBuilder;
    std::string top_;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<GuardedAssignment> assignments_;
    std::map<std::string, std::size_t> by_name_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

/// Flatten from `top` (default: the uninstantiated module) and build the graph.
/// Throws CombinationalLoop.
DesignCdfg build_cdfg(const hdl::DesignAst& ast, const std::string& top = {});

enum class Direction { Backward, Forward };

/// Signal -> fewest sequential edges on any path from/to a seed.
using Cone = std::map<std::string, int>;

/// Transitive closure from `seeds`. `max_depth` bounds the sequential depth.
Cone cone_of_influence(const DesignCdfg& g, const std::set<std::string>& seeds, Direction direction,
                       std::optional<int> max_depth = std::nullopt);

std::set<std::string> cone_signals(const Cone& cone);

/// Assignments to `target` in source order. Throws UnknownSignal.
std::vector<GuardedAssignment> guard_conditions(const DesignCdfg& g, const std::string& target);

struct DepthRange {
    int min = 0;
    int max = 0;
    friend bool operator==(const DepthRange&, const DepthRange&) = default;
};

/// Register stages on simple paths from -> to; nullopt if unreachable.
/// `max` saturates at `cap`.
std::optional<DepthRange> sequential_depth(const DesignCdfg& g, const std::string& from, const std::string& to,
                                           int cap = 8);

/// Graphviz text: one node per signal, edges labelled with kind and timing.
std::string to_dot(const DesignCdfg& g);

} // namespace assertfix::cdfg
