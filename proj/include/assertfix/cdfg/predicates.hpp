#pragma once

#include <optional>
#include <string>
#include <vector>

#include "assertfix/hdl/expr.hpp"

namespace assertfix::cdfg {

/// `signal == value` or `signal != value` recognized in a guard or antecedent.
/// A bare 1-bit `s` reads as `s == 1`, `!s` as `s == 0`.
struct Constraint {
    enum class Op { Eq, Ne } op = Op::Eq;
    std::string signal;
    std::uint64_t value = 0;
};

std::optional<Constraint> as_constraint(const hdl::ExprPtr& pred);

/// Constraints among the conjuncts of every predicate in `preds`.
std::vector<Constraint> constraints_of(const std::vector<hdl::ExprPtr>& preds);

/// True when `premises` syntactically force `goal`: the goal is one of the
/// conjuncts, or a constraint the premise constraints pin down.
bool implies(const std::vector<hdl::ExprPtr>& premises, const hdl::ExprPtr& goal);
bool implies_all(const std::vector<hdl::ExprPtr>& premises, const std::vector<hdl::ExprPtr>& goals);

/// True when some constraint in `a` conflicts with one in `b`:
/// `s == c` against `s == c'` (c != c') or against `s != c`.
bool contradicts(const std::vector<Constraint>& a, const std::vector<Constraint>& b);

} // namespace assertfix::cdfg
