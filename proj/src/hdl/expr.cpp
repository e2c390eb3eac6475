#include "assertfix/hdl/expr.hpp"

#include <algorithm>
#include <sstream>

namespace assertfix::hdl {

std::uint64_t width_mask(std::uint32_t width) noexcept {
    if (width >= 64) return ~std::uint64_t{0};
    return (std::uint64_t{1} << width) - 1;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ExprKind::Identifier:
        return a.name == b.name;
    case ExprKind::Constant:
        return a.constant == b.constant;
    case ExprKind::Unary:
        if (a.unary_op != b.unary_op) return false;
        break;
    case ExprKind::Binary:
        if (a.binary_op != b.binary_op) return false;
        break;
    case ExprKind::PartSelect:
        if (a.msb != b.msb || a.lsb != b.lsb) return false;
        break;
    case ExprKind::Replicate:
        if (a.amount != b.amount) return false;
        break;
    case ExprKind::SystemCall:
        if (a.name != b.name || a.amount != b.amount) return false;
        break;
    default:
        break;
    }
    if (a.operands.size() != b.operands.size()) return false;
    for (std::size_t i = 0; i < a.operands.size(); ++i) {
        if (!same_expr(a.operands[i], b.operands[i])) return false;
    }
    return true;
}

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

namespace {

std::shared_ptr<Expr> node(ExprKind kind, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->span = span;
    return e;
}

} // namespace

ExprPtr make_identifier(std::string name, SourceSpan span) {
    auto e = node(ExprKind::Identifier, span);
    e->name = std::move(name);
    return e;
}

ExprPtr make_constant(Constant c, SourceSpan span) {
    auto e = node(ExprKind::Constant, span);
    c.value &= width_mask(c.width);
    e->constant = c;
    return e;
}

ExprPtr make_constant(std::uint32_t width, std::uint64_t value, char base) {
    return make_constant(Constant{width, value, true, base});
}

ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourceSpan span) {
    auto e = node(ExprKind::Unary, span);
    e->unary_op = op;
    e->operands.push_back(std::move(operand));
    return e;
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span) {
    auto e = node(ExprKind::Binary, span);
    e->binary_op = op;
    e->operands = {std::move(lhs), std::move(rhs)};
    return e;
}

ExprPtr make_ternary(ExprPtr cond, ExprPtr then_expr, ExprPtr else_expr, SourceSpan span) {
    auto e = node(ExprKind::Ternary, span);
    e->operands = {std::move(cond), std::move(then_expr), std::move(else_expr)};
    return e;
}

ExprPtr make_bit_select(ExprPtr base, ExprPtr index, SourceSpan span) {
    auto e = node(ExprKind::BitSelect, span);
    e->operands = {std::move(base), std::move(index)};
    return e;
}

ExprPtr make_part_select(ExprPtr base, int msb, int lsb, SourceSpan span) {
    auto e = node(ExprKind::PartSelect, span);
    e->operands = {std::move(base)};
    e->msb = msb;
    e->lsb = lsb;
    return e;
}

ExprPtr make_concat(std::vector<ExprPtr> parts, SourceSpan span) {
    auto e = node(ExprKind::Concat, span);
    e->operands = std::move(parts);
    return e;
}

ExprPtr make_replicate(int count, ExprPtr inner, SourceSpan span) {
    auto e = node(ExprKind::Replicate, span);
    e->amount = count;
    e->operands = {std::move(inner)};
    return e;
}

ExprPtr make_past(ExprPtr operand, int depth, SourceSpan span) {
    auto e = node(ExprKind::SystemCall, span);
    e->name = "$past";
    e->amount = depth;
    e->operands = {std::move(operand)};
    return e;
}

ExprPtr make_system_call(std::string name, std::vector<ExprPtr> args, SourceSpan span) {
    auto e = node(ExprKind::SystemCall, span);
    e->name = std::move(name);
    e->operands = std::move(args);
    return e;
}

ExprPtr make_conjunction(const std::vector<ExprPtr>& terms) {
    if (terms.empty()) return make_constant(1, 1, 'b');
    ExprPtr acc = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) {
        acc = make_binary(BinaryOp::LogAnd, acc, terms[i]);
    }
    return acc;
}

ExprPtr negate(const ExprPtr& e) {
    if (e->kind == ExprKind::Unary && e->unary_op == UnaryOp::LogNot) return e->operands[0];
    if (e->kind == ExprKind::Binary) {
        switch (e->binary_op) {
        case BinaryOp::Eq: return make_binary(BinaryOp::Ne, e->operands[0], e->operands[1]);
        case BinaryOp::Ne: return make_binary(BinaryOp::Eq, e->operands[0], e->operands[1]);
        default: break;
        }
    }
    return make_unary(UnaryOp::LogNot, e);
}

std::vector<ExprPtr> conjuncts(const ExprPtr& e) {
    std::vector<ExprPtr> out;
    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
        if (x->kind == ExprKind::Binary && x->binary_op == BinaryOp::LogAnd) {
            walk(x->operands[0]);
            walk(x->operands[1]);
        } else {
            out.push_back(x);
        }
    };
    walk(e);
    return out;
}

int precedence(BinaryOp op) noexcept {
    switch (op) {
    case BinaryOp::LogOr: return 1;
    case BinaryOp::LogAnd: return 2;
    case BinaryOp::BitOr: return 3;
    case BinaryOp::BitXor:
    case BinaryOp::BitXnor: return 4;
    case BinaryOp::BitAnd: return 5;
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::CaseEq:
    case BinaryOp::CaseNe: return 6;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 7;
    case BinaryOp::Shl:
    case BinaryOp::Shr:
    case BinaryOp::AShl:
    case BinaryOp::AShr: return 8;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 9;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return 10;
    }
    return 0;
}

std::string_view spelling(BinaryOp op) noexcept {
    switch (op) {
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Shl: return "<<";
    case BinaryOp::Shr: return ">>";
    case BinaryOp::AShl: return "<<<";
    case BinaryOp::AShr: return ">>>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::CaseEq: return "===";
    case BinaryOp::CaseNe: return "!==";
    case BinaryOp::BitAnd: return "&";
    case BinaryOp::BitXor: return "^";
    case BinaryOp::BitXnor: return "~^";
    case BinaryOp::BitOr: return "|";
    case BinaryOp::LogAnd: return "&&";
    case BinaryOp::LogOr: return "||";
    }
    return "?";
}

std::string_view spelling(UnaryOp op) noexcept {
    switch (op) {
    case UnaryOp::Plus: return "+";
    case UnaryOp::Minus: return "-";
    case UnaryOp::LogNot: return "!";
    case UnaryOp::BitNot: return "~";
    case UnaryOp::RedAnd: return "&";
    case UnaryOp::RedNand: return "~&";
    case UnaryOp::RedOr: return "|";
    case UnaryOp::RedNor: return "~|";
    case UnaryOp::RedXor: return "^";
    case UnaryOp::RedXnor: return "~^";
    }
    return "?";
}

std::string render_constant(const Constant& c) {
    if (!c.sized) return std::to_string(c.value);
    std::string digits;
    switch (c.base) {
    case 'b':
        for (std::uint32_t i = c.width; i-- > 0;) digits.push_back(((c.value >> i) & 1) ? '1' : '0');
        break;
    case 'o': {
        std::ostringstream os;
        os << std::oct << c.value;
        digits = os.str();
        break;
    }
    case 'h': {
        std::ostringstream os;
        os << std::uppercase << std::hex << c.value;
        digits = os.str();
        break;
    }
    default:
        digits = std::to_string(c.value);
        break;
    }
    return std::to_string(c.width) + "'" + c.base + digits;
}

namespace {

bool is_reduction(const Expr& e) {
    if (e.kind != ExprKind::Unary) return false;
    switch (e.unary_op) {
    case UnaryOp::RedAnd:
    case UnaryOp::RedNand:
    case UnaryOp::RedOr:
    case UnaryOp::RedNor:
    case UnaryOp::RedXor:
    case UnaryOp::RedXnor: return true;
    default: return false;
    }
}

void render_into(const Expr& e, std::string& out);

void render_binary_operand(const Expr& child, int parent_prec, bool right, std::string& out) {
    bool paren = false;
    if (child.kind == ExprKind::Ternary) {
        paren = true;
    } else if (child.kind == ExprKind::Binary) {
        int c = precedence(child.binary_op);
        paren = c < parent_prec || (c == parent_prec && right);
    } else if (is_reduction(child)) {
        paren = true;
    }
    if (paren) out.push_back('(');
    render_into(child, out);
    if (paren) out.push_back(')');
}

void render_into(const Expr& e, std::string& out) {
    switch (e.kind) {
    case ExprKind::Identifier:
        out += e.name;
        return;
    case ExprKind::Constant:
        out += render_constant(e.constant);
        return;
    case ExprKind::Unary: {
        out += spelling(e.unary_op);
        const Expr& operand = *e.operands[0];
        bool paren = operand.kind == ExprKind::Binary || operand.kind == ExprKind::Ternary ||
                     operand.kind == ExprKind::Unary;
        if (paren) out.push_back('(');
        render_into(operand, out);
        if (paren) out.push_back(')');
        return;
    }
    case ExprKind::Binary: {
        int p = precedence(e.binary_op);
        render_binary_operand(*e.operands[0], p, false, out);
        out.push_back(' ');
        out += spelling(e.binary_op);
        out.push_back(' ');
        render_binary_operand(*e.operands[1], p, true, out);
        return;
    }
    case ExprKind::Ternary: {
        auto part = [&](const Expr& x) {
            bool paren = x.kind == ExprKind::Ternary;
            if (paren) out.push_back('(');
            render_into(x, out);
            if (paren) out.push_back(')');
        };
        part(*e.operands[0]);
        out += " ? ";
        part(*e.operands[1]);
        out += " : ";
        render_into(*e.operands[2], out);
        return;
    }
    case ExprKind::BitSelect:
        render_into(*e.operands[0], out);
        out.push_back('[');
        render_into(*e.operands[1], out);
        out.push_back(']');
        return;
    case ExprKind::PartSelect:
        render_into(*e.operands[0], out);
        out += "[" + std::to_string(e.msb) + ":" + std::to_string(e.lsb) + "]";
        return;
    case ExprKind::Concat:
        out.push_back('{');
        for (std::size_t i = 0; i < e.operands.size(); ++i) {
            if (i) out += ", ";
            render_into(*e.operands[i], out);
        }
        out.push_back('}');
        return;
    case ExprKind::Replicate:
        out += "{" + std::to_string(e.amount);
        render_into(*e.operands[0], out);
        out.push_back('}');
        return;
    case ExprKind::SystemCall:
        out += e.name;
        out.push_back('(');
        for (std::size_t i = 0; i < e.operands.size(); ++i) {
            if (i) out += ", ";
            render_into(*e.operands[i], out);
        }
        if (e.name == "$past" && e.amount != 1) out += ", " + std::to_string(e.amount);
        out.push_back(')');
        return;
    }
}

} // namespace

std::string render_expr(const Expr& e) {
    std::string out;
    render_into(e, out);
    return out;
}

void visit(const Expr& e, const std::function<void(const Expr&)>& fn) {
    fn(e);
    for (const auto& op : e.operands) visit(*op, fn);
}

std::set<std::string> collect_signals(const Expr& e) {
    std::set<std::string> out;
    visit(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Identifier) out.insert(x.name);
    });
    return out;
}

void collect_signals_by_time(const Expr& e, std::set<std::string>& current, std::set<std::string>& past) {
    std::function<void(const Expr&, bool)> walk = [&](const Expr& x, bool in_past) {
        if (x.kind == ExprKind::Identifier) {
            (in_past ? past : current).insert(x.name);
            return;
        }
        bool inner = in_past || x.is_past();
        for (const auto& op : x.operands) walk(*op, inner);
    };
    walk(e, false);
}

ExprPtr transform(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn) {
    if (auto replaced = fn(e)) return replaced;
    if (e->operands.empty()) return e;
    bool changed = false;
    std::vector<ExprPtr> ops;
    ops.reserve(e->operands.size());
    for (const auto& op : e->operands) {
        ops.push_back(transform(op, fn));
        changed = changed || ops.back() != op;
    }
    if (!changed) return e;
    auto copy = std::make_shared<Expr>(*e);
    copy->operands = std::move(ops);
    return copy;
}

ExprPtr rename_identifiers(const ExprPtr& e, const std::function<std::string(const std::string&)>& fn) {
    return transform(e, [&](const ExprPtr& x) -> ExprPtr {
        if (x->kind != ExprKind::Identifier) return nullptr;
        return make_identifier(fn(x->name), x->span);
    });
}

std::optional<std::string> base_signal(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Identifier: return e.name;
    case ExprKind::BitSelect:
    case ExprKind::PartSelect: return base_signal(*e.operands[0]);
    default: return std::nullopt;
    }
}

std::optional<std::int64_t> fold_constant(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Constant:
        return static_cast<std::int64_t>(e.constant.value);
    case ExprKind::Unary: {
        auto v = fold_constant(*e.operands[0]);
        if (!v) return std::nullopt;
        switch (e.unary_op) {
        case UnaryOp::Plus: return *v;
        case UnaryOp::Minus: return -*v;
        case UnaryOp::LogNot: return *v == 0;
        default: return std::nullopt;
        }
    }
    case ExprKind::Binary: {
        auto a = fold_constant(*e.operands[0]);
        auto b = fold_constant(*e.operands[1]);
        if (!a || !b) return std::nullopt;
        switch (e.binary_op) {
        case BinaryOp::Add: return *a + *b;
        case BinaryOp::Sub: return *a - *b;
        case BinaryOp::Mul: return *a * *b;
        case BinaryOp::Div: return *b == 0 ? std::nullopt : std::optional<std::int64_t>(*a / *b);
        case BinaryOp::Mod: return *b == 0 ? std::nullopt : std::optional<std::int64_t>(*a % *b);
        case BinaryOp::Shl: return *a << *b;
        case BinaryOp::Shr: return *a >> *b;
        default: return std::nullopt;
        }
    }
    case ExprKind::Ternary: {
        auto c = fold_constant(*e.operands[0]);
        if (!c) return std::nullopt;
        return fold_constant(*e.operands[*c ? 1 : 2]);
    }
    default:
        return std::nullopt;
    }
}

} // namespace assertfix::hdl
