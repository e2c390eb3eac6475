#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "assertfix/hdl/source.hpp"

namespace assertfix::hdl {

/// A 2-state constant normalized to (width, value). Base and sizedness are
/// rendering hints only and take no part in equality: 3'b100 == 3'd4.
struct Constant {
    std::uint32_t width = 32;
    std::uint64_t value = 0;
    bool sized = false;
    char base = 'd'; // 'b', 'o', 'd' or 'h'

    friend bool operator==(const Constant& a, const Constant& b) noexcept {
        return a.width == b.width && a.value == b.value;
    }
    bool same_value(const Constant& other) const noexcept { return value == other.value; }
};

std::uint64_t width_mask(std::uint32_t width) noexcept;

enum class UnaryOp { Plus, Minus, LogNot, BitNot, RedAnd, RedNand, RedOr, RedNor, RedXor, RedXnor };

enum class BinaryOp {
    Mul, Div, Mod,
    Add, Sub,
    Shl, Shr, AShl, AShr,
    Lt, Le, Gt, Ge,
    Eq, Ne, CaseEq, CaseNe,
    BitAnd,
    BitXor, BitXnor,
    BitOr,
    LogAnd,
    LogOr,
};

enum class ExprKind {
    Identifier,
    Constant,
    Unary,
    Binary,
    Ternary,
    BitSelect,  // operands: {base, index}
    PartSelect, // operands: {base}; msb/lsb are constant
    Concat,
    Replicate,  // operands: {inner concat}; amount = count
    SystemCall, // $past (amount = depth), $rose, $fell, $stable
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node shared by the Verilog and SVA front ends.
struct Expr {
    ExprKind kind = ExprKind::Identifier;
    std::string name;          // identifier or system function name
    Constant constant;         // ExprKind::Constant
    UnaryOp unary_op = UnaryOp::Plus;
    BinaryOp binary_op = BinaryOp::Add;
    std::vector<ExprPtr> operands;
    int msb = 0;               // PartSelect
    int lsb = 0;
    int amount = 0;            // $past depth, replication count
    SourceSpan span;           // excluded from equality

    bool is_identifier() const noexcept { return kind == ExprKind::Identifier; }
    bool is_constant() const noexcept { return kind == ExprKind::Constant; }
    bool is_past() const noexcept { return kind == ExprKind::SystemCall && name == "$past"; }
};

/// Structural equality, ignoring source spans and rendering hints.
bool operator==(const Expr& a, const Expr& b);
bool same_expr(const ExprPtr& a, const ExprPtr& b);

// Builders. Spans default to empty.
ExprPtr make_identifier(std::string name, SourceSpan span = {});
ExprPtr make_constant(Constant c, SourceSpan span = {});
ExprPtr make_constant(std::uint32_t width, std::uint64_t value, char base = 'b');
ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourceSpan span = {});
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span = {});
ExprPtr make_ternary(ExprPtr cond, ExprPtr then_expr, ExprPtr else_expr, SourceSpan span = {});
ExprPtr make_bit_select(ExprPtr base, ExprPtr index, SourceSpan span = {});
ExprPtr make_part_select(ExprPtr base, int msb, int lsb, SourceSpan span = {});
ExprPtr make_concat(std::vector<ExprPtr> parts, SourceSpan span = {});
ExprPtr make_replicate(int count, ExprPtr inner, SourceSpan span = {});
ExprPtr make_past(ExprPtr operand, int depth, SourceSpan span = {});
ExprPtr make_system_call(std::string name, std::vector<ExprPtr> args, SourceSpan span = {});

/// Conjunction of the given predicates with `&&`; an empty list yields 1'b1.
ExprPtr make_conjunction(const std::vector<ExprPtr>& terms);
/// Logical negation with light simplification (!!a -> a, !(a == b) -> a != b).
ExprPtr negate(const ExprPtr& e);
/// Split a tree of `&&` into its conjuncts, left to right.
std::vector<ExprPtr> conjuncts(const ExprPtr& e);

int precedence(BinaryOp op) noexcept;
std::string_view spelling(BinaryOp op) noexcept;
std::string_view spelling(UnaryOp op) noexcept;

std::string render_constant(const Constant& c);
/// Render with the minimum parentheses needed to re-parse to the same tree.
std::string render_expr(const Expr& e);

/// Identifier names referenced anywhere in the tree (including under $past).
std::set<std::string> collect_signals(const Expr& e);
/// Identifiers referenced outside any $past, and those referenced inside one.
void collect_signals_by_time(const Expr& e, std::set<std::string>& current, std::set<std::string>& past);

/// Pre-order visit of every node.
void visit(const Expr& e, const std::function<void(const Expr&)>& fn);

/// Rebuild the tree replacing nodes for which `fn` returns a non-null pointer.
ExprPtr transform(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn);

/// Rename identifiers (used when flattening instances).
ExprPtr rename_identifiers(const ExprPtr& e, const std::function<std::string(const std::string&)>& fn);

/// Signal named by an lvalue-like expression (identifier or select of one).
std::optional<std::string> base_signal(const Expr& e);

/// Evaluate an expression made only of constants (parameter widths, ranges).
std::optional<std::int64_t> fold_constant(const Expr& e);

} // namespace assertfix::hdl
