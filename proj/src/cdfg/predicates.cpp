#include "assertfix/cdfg/predicates.hpp"

namespace assertfix::cdfg {

using hdl::BinaryOp;
using hdl::ExprKind;

std::optional<Constraint> as_constraint(const hdl::ExprPtr& pred) {
    if (!pred) return std::nullopt;
    if (pred->is_identifier()) return Constraint{Constraint::Op::Eq, pred->name, 1};
    if (pred->kind == ExprKind::Unary && pred->unary_op == hdl::UnaryOp::LogNot && pred->operands[0]->is_identifier()) {
        return Constraint{Constraint::Op::Eq, pred->operands[0]->name, 0};
    }
    if (pred->kind != ExprKind::Binary) return std::nullopt;
    if (pred->binary_op != BinaryOp::Eq && pred->binary_op != BinaryOp::Ne && pred->binary_op != BinaryOp::CaseEq &&
        pred->binary_op != BinaryOp::CaseNe) {
        return std::nullopt;
    }
    const auto& l = pred->operands[0];
    const auto& r = pred->operands[1];
    const hdl::Expr* sig = nullptr;
    const hdl::Expr* val = nullptr;
    if (l->is_identifier() && r->is_constant()) {
        sig = l.get();
        val = r.get();
    } else if (r->is_identifier() && l->is_constant()) {
        sig = r.get();
        val = l.get();
    } else {
        return std::nullopt;
    }
    bool eq = pred->binary_op == BinaryOp::Eq || pred->binary_op == BinaryOp::CaseEq;
    return Constraint{eq ? Constraint::Op::Eq : Constraint::Op::Ne, sig->name, val->constant.value};
}

std::vector<Constraint> constraints_of(const std::vector<hdl::ExprPtr>& preds) {
    std::vector<Constraint> out;
    for (const auto& p : preds) {
        for (const auto& c : hdl::conjuncts(p)) {
            if (auto k = as_constraint(c)) out.push_back(*k);
        }
    }
    return out;
}

bool implies(const std::vector<hdl::ExprPtr>& premises, const hdl::ExprPtr& goal) {
    std::vector<hdl::ExprPtr> flat;
    for (const auto& p : premises) {
        for (const auto& c : hdl::conjuncts(p)) flat.push_back(c);
    }
    for (const auto& g : hdl::conjuncts(goal)) {
        bool ok = false;
        for (const auto& p : flat) {
            if (hdl::same_expr(p, g)) {
                ok = true;
                break;
            }
        }
        if (ok) continue;
        auto want = as_constraint(g);
        if (!want) return false;
        for (const auto& have : constraints_of(flat)) {
            if (have.signal != want->signal) continue;
            if (want->op == Constraint::Op::Eq) {
                ok = have.op == Constraint::Op::Eq && have.value == want->value;
            } else {
                ok = (have.op == Constraint::Op::Ne && have.value == want->value) ||
                     (have.op == Constraint::Op::Eq && have.value != want->value);
            }
            if (ok) break;
        }
        if (!ok) return false;
    }
    return true;
}

bool implies_all(const std::vector<hdl::ExprPtr>& premises, const std::vector<hdl::ExprPtr>& goals) {
    for (const auto& g : goals) {
        if (!implies(premises, g)) return false;
    }
    return true;
}

bool contradicts(const std::vector<Constraint>& a, const std::vector<Constraint>& b) {
    for (const auto& x : a) {
        for (const auto& y : b) {
            if (x.signal != y.signal) continue;
            if (x.op == Constraint::Op::Eq && y.op == Constraint::Op::Eq && x.value != y.value) return true;
            if (x.op != y.op && x.value == y.value) return true;
        }
    }
    return false;
}

} // namespace assertfix::cdfg
