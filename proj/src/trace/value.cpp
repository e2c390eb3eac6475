#include "assertfix/trace/value.hpp"

#include <algorithm>
#include <cstdio>

#include "assertfix/error.hpp"

namespace assertfix::trace {

using hdl::BinaryOp;
using hdl::Expr;
using hdl::ExprKind;
using hdl::UnaryOp;
using hdl::width_mask;

Value Value::of(std::uint32_t width, std::uint64_t bits) {
    return Value{width, true, bits & width_mask(width)};
}

Value Value::unknown(std::uint32_t width) {
    return Value{width, false, 0};
}

std::string Value::to_string() const {
    if (!known) return "x";
    if (width == 1) return bits ? "1" : "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(bits));
    return std::string("0x") + buf;
}

namespace {

Value resize(Value v, std::uint32_t width) {
    v.width = width;
    if (v.known) v.bits &= width_mask(width);
    return v;
}

class Evaluator {
public:
    Evaluator(const ValueSource& src, int cycle) : src_(src), cycle_(cycle) {}

    Value eval(const Expr& e, std::uint32_t ctx) {
        ctx = std::max(ctx, self_width(e, src_));
        switch (e.kind) {
        case ExprKind::Identifier:
            return resize(src_.at(e.name, cycle_), ctx);
        case ExprKind::Constant:
            return Value::of(ctx, e.constant.value);
        case ExprKind::Unary:
            return unary(e, ctx);
        case ExprKind::Binary:
            return binary(e, ctx);
        case ExprKind::Ternary: {
            auto c = eval(*e.operands[0], 1).truth();
            if (c) return eval(*e.operands[*c ? 1 : 2], ctx);
            Value t = eval(*e.operands[1], ctx);
            Value f = eval(*e.operands[2], ctx);
            return t.known && f.known && t.bits == f.bits ? t : Value::unknown(ctx);
        }
        case ExprKind::BitSelect: {
            const Expr& base = *e.operands[0];
            Value idx = eval(*e.operands[1], 0);
            Value v = src_.at(base.name, cycle_);
            if (!idx.known || !v.known) return Value::unknown(ctx);
            std::int64_t bit = static_cast<std::int64_t>(idx.bits) - src_.lsb(base.name);
            if (bit < 0 || bit >= static_cast<std::int64_t>(v.width)) return Value::unknown(ctx);
            return Value::of(ctx, (v.bits >> bit) & 1);
        }
        case ExprKind::PartSelect: {
            const Expr& base = *e.operands[0];
            Value v = src_.at(base.name, cycle_);
            int lo = std::min(e.msb, e.lsb) - src_.lsb(base.name);
            int hi = std::max(e.msb, e.lsb) - src_.lsb(base.name);
            if (lo < 0 || hi >= static_cast<int>(v.width)) {
                throw WidthMismatch("part-select [" + std::to_string(e.msb) + ":" + std::to_string(e.lsb) +
                                    "] out of range for '" + base.name + "'");
            }
            if (!v.known) return Value::unknown(ctx);
            return Value::of(ctx, (v.bits >> lo) & width_mask(static_cast<std::uint32_t>(hi - lo + 1)));
        }
        case ExprKind::Concat: {
            std::uint64_t bits = 0;
            bool known = true;
            for (const auto& part : e.operands) {
                std::uint32_t w = self_width(*part, src_);
                Value v = eval(*part, w);
                known = known && v.known;
                bits = w >= 64 ? v.bits : (bits << w) | v.bits;
            }
            return known ? Value::of(ctx, bits) : Value::unknown(ctx);
        }
        case ExprKind::Replicate: {
            std::uint32_t w = self_width(*e.operands[0], src_);
            Value v = eval(*e.operands[0], w);
            if (!v.known) return Value::unknown(ctx);
            std::uint64_t bits = 0;
            for (int i = 0; i < e.amount; ++i) bits = w >= 64 ? v.bits : (bits << w) | v.bits;
            return Value::of(ctx, bits);
        }
        case ExprKind::SystemCall:
            return system_call(e, ctx);
        }
        return Value::unknown(ctx);
    }

private:
    Value unary(const Expr& e, std::uint32_t ctx) {
        const Expr& op = *e.operands[0];
        switch (e.unary_op) {
        case UnaryOp::Plus:
            return eval(op, ctx);
        case UnaryOp::Minus: {
            Value v = eval(op, ctx);
            return v.known ? Value::of(ctx, ~v.bits + 1) : v;
        }
        case UnaryOp::BitNot: {
            Value v = eval(op, ctx);
            return v.known ? Value::of(ctx, ~v.bits) : v;
        }
        case UnaryOp::LogNot: {
            auto t = eval(op, 0).truth();
            return t ? Value::of(ctx, !*t) : Value::unknown(ctx);
        }
        default:
            break;
        }
        std::uint32_t w = self_width(op, src_);
        Value v = eval(op, w);
        if (!v.known) return Value::unknown(ctx);
        std::uint64_t m = width_mask(w);
        bool r = false;
        switch (e.unary_op) {
        case UnaryOp::RedAnd: r = v.bits == m; break;
        case UnaryOp::RedNand: r = v.bits != m; break;
        case UnaryOp::RedOr: r = v.bits != 0; break;
        case UnaryOp::RedNor: r = v.bits == 0; break;
        case UnaryOp::RedXor: r = __builtin_popcountll(v.bits) & 1; break;
        case UnaryOp::RedXnor: r = !(__builtin_popcountll(v.bits) & 1); break;
        default: break;
        }
        return Value::of(ctx, r);
    }

    Value binary(const Expr& e, std::uint32_t ctx) {
        const Expr& l = *e.operands[0];
        const Expr& r = *e.operands[1];
        switch (e.binary_op) {
        case BinaryOp::LogAnd: {
            auto a = eval(l, 0).truth();
            auto b = eval(r, 0).truth();
            if ((a && !*a) || (b && !*b)) return Value::of(ctx, 0);
            if (a && b) return Value::of(ctx, 1);
            return Value::unknown(ctx);
        }
        case BinaryOp::LogOr: {
            auto a = eval(l, 0).truth();
            auto b = eval(r, 0).truth();
            if ((a && *a) || (b && *b)) return Value::of(ctx, 1);
            if (a && b) return Value::of(ctx, 0);
            return Value::unknown(ctx);
        }
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge:
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::CaseEq:
        case BinaryOp::CaseNe: {
            std::uint32_t w = std::max(self_width(l, src_), self_width(r, src_));
            Value a = eval(l, w);
            Value b = eval(r, w);
            if (e.binary_op == BinaryOp::CaseEq || e.binary_op == BinaryOp::CaseNe) {
                bool eq = a.known == b.known && (!a.known || a.bits == b.bits);
                return Value::of(ctx, e.binary_op == BinaryOp::CaseEq ? eq : !eq);
            }
            if (!a.known || !b.known) return Value::unknown(ctx);
            bool res = false;
            switch (e.binary_op) {
            case BinaryOp::Lt: res = a.bits < b.bits; break;
            case BinaryOp::Le: res = a.bits <= b.bits; break;
            case BinaryOp::Gt: res = a.bits > b.bits; break;
            case BinaryOp::Ge: res = a.bits >= b.bits; break;
            case BinaryOp::Eq: res = a.bits == b.bits; break;
            case BinaryOp::Ne: res = a.bits != b.bits; break;
            default: break;
            }
            return Value::of(ctx, res);
        }
        case BinaryOp::Shl:
        case BinaryOp::Shr:
        case BinaryOp::AShl:
        case BinaryOp::AShr: {
            Value a = eval(l, ctx);
            Value n = eval(r, 0);
            if (!a.known || !n.known) return Value::unknown(ctx);
            if (n.bits >= 64) return Value::of(ctx, 0);
            bool left = e.binary_op == BinaryOp::Shl || e.binary_op == BinaryOp::AShl;
            return Value::of(ctx, left ? a.bits << n.bits : a.bits >> n.bits);
        }
        default:
            break;
        }
        Value a = eval(l, ctx);
        Value b = eval(r, ctx);
        std::uint64_t m = width_mask(ctx);
        if (e.binary_op == BinaryOp::BitAnd) {
            if ((a.known && a.bits == 0) || (b.known && b.bits == 0)) return Value::of(ctx, 0);
        }
        if (e.binary_op == BinaryOp::BitOr) {
            if ((a.known && a.bits == m) || (b.known && b.bits == m)) return Value::of(ctx, m);
        }
        if (!a.known || !b.known) return Value::unknown(ctx);
        switch (e.binary_op) {
        case BinaryOp::Add: return Value::of(ctx, a.bits + b.bits);
        case BinaryOp::Sub: return Value::of(ctx, a.bits - b.bits);
        case BinaryOp::Mul: return Value::of(ctx, a.bits * b.bits);
        case BinaryOp::Div: return b.bits ? Value::of(ctx, a.bits / b.bits) : Value::unknown(ctx);
        case BinaryOp::Mod: return b.bits ? Value::of(ctx, a.bits % b.bits) : Value::unknown(ctx);
        case BinaryOp::BitAnd: return Value::of(ctx, a.bits & b.bits);
        case BinaryOp::BitOr: return Value::of(ctx, a.bits | b.bits);
        case BinaryOp::BitXor: return Value::of(ctx, a.bits ^ b.bits);
        case BinaryOp::BitXnor: return Value::of(ctx, ~(a.bits ^ b.bits));
        default: return Value::unknown(ctx);
        }
    }

    Value system_call(const Expr& e, std::uint32_t ctx) {
        const Expr& op = *e.operands[0];
        if (e.is_past()) {
            Evaluator earlier(src_, cycle_ - e.amount);
            if (cycle_ - e.amount < 0) return Value::unknown(ctx);
            return earlier.eval(op, ctx);
        }
        std::uint32_t w = self_width(op, src_);
        Value now = eval(op, w);
        Value before = cycle_ >= 1 ? Evaluator(src_, cycle_ - 1).eval(op, w) : Value::unknown(w);
        if (e.name == "$stable") {
            if (!now.known || !before.known) return Value::unknown(ctx);
            return Value::of(ctx, now.bits == before.bits);
        }
        // $rose / $fell look at the least significant bit.
        std::optional<bool> cur = now.known ? std::optional<bool>((now.bits & 1) != 0) : std::nullopt;
        std::optional<bool> prev = before.known ? std::optional<bool>((before.bits & 1) != 0) : std::nullopt;
        bool rose = e.name == "$rose";
        bool want_cur = rose;
        if ((cur && *cur != want_cur) || (prev && *prev == want_cur)) return Value::of(ctx, 0);
        if (cur && prev) return Value::of(ctx, 1);
        return Value::unknown(ctx);
    }

    const ValueSource& src_;
    int cycle_;
};

} // namespace

std::uint32_t self_width(const Expr& e, const ValueSource& src) {
    switch (e.kind) {
    case ExprKind::Identifier:
        return src.width(e.name);
    case ExprKind::Constant:
        return e.constant.width;
    case ExprKind::Unary:
        switch (e.unary_op) {
        case UnaryOp::Plus:
        case UnaryOp::Minus:
        case UnaryOp::BitNot:
            return self_width(*e.operands[0], src);
        default:
            return 1;
        }
    case ExprKind::Binary:
        switch (e.binary_op) {
        case BinaryOp::Lt: case BinaryOp::Le: case BinaryOp::Gt: case BinaryOp::Ge:
        case BinaryOp::Eq: case BinaryOp::Ne: case BinaryOp::CaseEq: case BinaryOp::CaseNe:
        case BinaryOp::LogAnd: case BinaryOp::LogOr:
            return 1;
        case BinaryOp::Shl: case BinaryOp::Shr: case BinaryOp::AShl: case BinaryOp::AShr:
            return self_width(*e.operands[0], src);
        default:
            return std::max(self_width(*e.operands[0], src), self_width(*e.operands[1], src));
        }
    case ExprKind::Ternary:
        return std::max(self_width(*e.operands[1], src), self_width(*e.operands[2], src));
    case ExprKind::BitSelect:
        return 1;
    case ExprKind::PartSelect:
        return static_cast<std::uint32_t>(std::abs(e.msb - e.lsb) + 1);
    case ExprKind::Concat: {
        std::uint32_t w = 0;
        for (const auto& p : e.operands) w += self_width(*p, src);
        if (w > 64) throw WidthMismatch("concatenation wider than 64 bits");
        return w;
    }
    case ExprKind::Replicate: {
        std::uint32_t w = static_cast<std::uint32_t>(e.amount) * self_width(*e.operands[0], src);
        if (w > 64) throw WidthMismatch("replication wider than 64 bits");
        return std::max<std::uint32_t>(w, 1);
    }
    case ExprKind::SystemCall:
        return e.is_past() ? self_width(*e.operands[0], src) : 1;
    }
    return 1;
}

Value evaluate_expr(const Expr& e, const ValueSource& src, int cycle) {
    Evaluator ev(src, cycle);
    return ev.eval(e, 0);
}

} // namespace assertfix::trace
