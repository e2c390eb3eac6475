#include "parser_base.hpp"

#include <cctype>
#include <optional>

namespace assertfix::hdl {

namespace {

std::optional<BinaryOp> binary_op(const Token& t) {
    if (t.kind != TokenKind::Symbol) return std::nullopt;
    static const std::pair<std::string_view, BinaryOp> table[] = {
        {"*", BinaryOp::Mul},     {"/", BinaryOp::Div},      {"%", BinaryOp::Mod},     {"+", BinaryOp::Add},
        {"-", BinaryOp::Sub},     {"<<", BinaryOp::Shl},     {">>", BinaryOp::Shr},    {"<<<", BinaryOp::AShl},
        {">>>", BinaryOp::AShr},  {"<", BinaryOp::Lt},       {"<=", BinaryOp::Le},     {">", BinaryOp::Gt},
        {">=", BinaryOp::Ge},     {"==", BinaryOp::Eq},      {"!=", BinaryOp::Ne},     {"===", BinaryOp::CaseEq},
        {"!==", BinaryOp::CaseNe}, {"&", BinaryOp::BitAnd},  {"^", BinaryOp::BitXor},  {"~^", BinaryOp::BitXnor},
        {"^~", BinaryOp::BitXnor}, {"|", BinaryOp::BitOr},   {"&&", BinaryOp::LogAnd}, {"||", BinaryOp::LogOr},
    };
    for (const auto& [text, op] : table) {
        if (t.text == text) return op;
    }
    return std::nullopt;
}

std::optional<UnaryOp> unary_op(const Token& t) {
    if (t.kind != TokenKind::Symbol) return std::nullopt;
    static const std::pair<std::string_view, UnaryOp> table[] = {
        {"+", UnaryOp::Plus},    {"-", UnaryOp::Minus},    {"!", UnaryOp::LogNot}, {"~", UnaryOp::BitNot},
        {"&", UnaryOp::RedAnd},  {"~&", UnaryOp::RedNand}, {"|", UnaryOp::RedOr},  {"~|", UnaryOp::RedNor},
        {"^", UnaryOp::RedXor},  {"~^", UnaryOp::RedXnor}, {"^~", UnaryOp::RedXnor},
    };
    for (const auto& [text, op] : table) {
        if (t.text == text) return op;
    }
    return std::nullopt;
}

} // namespace

ParserBase::ParserBase(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty() || tokens_.back().kind != TokenKind::End) {
        Token end;
        end.kind = TokenKind::End;
        tokens_.push_back(end);
    }
}

const Token& ParserBase::peek(std::size_t ahead) const noexcept {
    std::size_t i = index_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
}

void ParserBase::advance() {
    if (index_ + 1 < tokens_.size()) ++index_;
}

bool ParserBase::accept(std::string_view s) {
    if (!at(s)) return false;
    advance();
    return true;
}

const Token& ParserBase::expect(std::string_view s) {
    if (!at(s)) fail("unexpected '" + cur().text + "'", {"'" + std::string(s) + "'"});
    const Token& t = cur();
    advance();
    return t;
}

const Token& ParserBase::expect_identifier(std::string_view what) {
    if (cur().kind != TokenKind::Identifier) fail("unexpected '" + cur().text + "'", {std::string(what)});
    const Token& t = cur();
    advance();
    return t;
}

void ParserBase::fail(const std::string& message, std::vector<std::string> expected) const {
    std::string msg = at_end() ? "unexpected end of input" : message;
    throw SyntaxError(msg, cur().pos, std::move(expected));
}

SourceSpan ParserBase::span_from(const Token& first) const {
    const Token& last = index_ > 0 ? tokens_[index_ - 1] : first;
    return SourceSpan{first.pos.file, first.pos.line, last.end_line, first.pos.offset, last.end_offset};
}

SourceSpan ParserBase::token_span(const Token& t) const {
    return SourceSpan{t.pos.file, t.pos.line, t.end_line, t.pos.offset, t.end_offset};
}

Constant ParserBase::parse_number(const Token& t) const {
    const std::string& text = t.text;
    auto quote = text.find('\'');
    Constant c;
    std::string digits;
    int radix = 10;
    if (quote == std::string::npos) {
        digits = text;
        c.sized = false;
        c.base = 'd';
    } else {
        std::string size_text = text.substr(0, quote);
        std::size_t p = quote + 1;
        if (p < text.size() && (text[p] == 's' || text[p] == 'S')) {
            throw UnsupportedConstruct("signed literal", token_span(t));
        }
        char base = static_cast<char>(std::tolower(static_cast<unsigned char>(text[p])));
        c.base = base;
        radix = base == 'b' ? 2 : base == 'o' ? 8 : base == 'h' ? 16 : 10;
        digits = text.substr(p + 1);
        if (!size_text.empty()) {
            std::string clean;
            for (char ch : size_text) {
                if (ch != '_') clean.push_back(ch);
            }
            unsigned long w = std::stoul(clean);
            if (w == 0) throw SyntaxError("zero-width literal", t.pos);
            if (w > 64) throw UnsupportedConstruct("literal wider than 64 bits", token_span(t));
            c.width = static_cast<std::uint32_t>(w);
            c.sized = true;
        } else {
            c.sized = false;
        }
    }
    std::uint64_t value = 0;
    bool any = false;
    for (char ch : digits) {
        if (ch == '_') continue;
        char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (lower == 'x' || lower == 'z' || lower == '?') {
            throw UnsupportedConstruct("x/z literal", token_span(t));
        }
        int d = std::isdigit(static_cast<unsigned char>(lower)) ? lower - '0' : lower - 'a' + 10;
        if (d < 0 || d >= radix) throw SyntaxError("invalid digit in literal '" + text + "'", t.pos);
        unsigned __int128 next = static_cast<unsigned __int128>(value) * radix + d;
        if (next >> 64) throw UnsupportedConstruct("literal wider than 64 bits", token_span(t));
        value = static_cast<std::uint64_t>(next);
        any = true;
    }
    if (!any) throw SyntaxError("literal without digits", t.pos);
    if (!c.sized) c.width = value >> 32 ? 64 : 32;
    c.value = value & width_mask(c.width);
    return c;
}

int ParserBase::parse_constant_int(std::string_view what) {
    ExprPtr e = parse_expression();
    auto v = fold_constant(*e);
    if (!v) {
        throw SyntaxError("expected a constant " + std::string(what), cur().pos);
    }
    return static_cast<int>(*v);
}

ExprPtr ParserBase::parse_expression() {
    const Token& first = cur();
    ExprPtr cond = parse_binary(1);
    if (accept("?")) {
        ExprPtr t = parse_expression();
        expect(":");
        ExprPtr e = parse_expression();
        return make_ternary(cond, t, e, span_from(first));
    }
    return cond;
}

ExprPtr ParserBase::parse_binary(int min_prec) {
    const Token& first = cur();
    ExprPtr lhs = parse_unary();
    while (true) {
        if (at("**")) throw UnsupportedConstruct("power operator", token_span(cur()));
        auto op = binary_op(cur());
        if (!op || precedence(*op) < min_prec) break;
        advance();
        ExprPtr rhs = parse_binary(precedence(*op) + 1);
        lhs = make_binary(*op, lhs, rhs, span_from(first));
    }
    return lhs;
}

ExprPtr ParserBase::parse_unary() {
    const Token& first = cur();
    if (auto op = unary_op(cur())) {
        advance();
        ExprPtr operand = parse_unary();
        return make_unary(*op, operand, span_from(first));
    }
    return parse_primary();
}

ExprPtr ParserBase::parse_primary() {
    const Token& first = cur();
    switch (first.kind) {
    case TokenKind::Number: {
        advance();
        return make_constant(parse_number(first), token_span(first));
    }
    case TokenKind::Identifier: {
        advance();
        ExprPtr base = resolve_identifier(first);
        return parse_selects(base, first);
    }
    case TokenKind::SystemIdentifier: {
        advance();
        return parse_system_call(first);
    }
    case TokenKind::Symbol:
        if (first.text == "(") {
            advance();
            ExprPtr inner = parse_expression();
            expect(")");
            return inner;
        }
        if (first.text == "{") {
            advance();
            return parse_concat(first);
        }
        break;
    default:
        break;
    }
    fail("unexpected '" + first.text + "'", {"expression"});
}

ExprPtr ParserBase::parse_selects(ExprPtr base, const Token& first) {
    if (!at("[")) return base;
    if (!base->is_identifier()) fail("select applied to a non-signal");
    advance();
    ExprPtr index = parse_expression();
    if (at("+:") || at("-:")) throw UnsupportedConstruct("indexed part-select", token_span(cur()));
    ExprPtr result;
    if (accept(":")) {
        auto msb = fold_constant(*index);
        if (!msb) fail("part-select bounds must be constant");
        int lsb = parse_constant_int("part-select bound");
        expect("]");
        result = make_part_select(base, static_cast<int>(*msb), lsb, span_from(first));
    } else {
        expect("]");
        result = make_bit_select(base, index, span_from(first));
    }
    if (at("[")) throw UnsupportedConstruct("multi-dimensional select (memory)", token_span(cur()));
    return result;
}

ExprPtr ParserBase::parse_concat(const Token& open) {
    ExprPtr first = parse_expression();
    if (at("{")) {
        auto count = fold_constant(*first);
        if (!count || *count < 0) fail("replication count must be a non-negative constant");
        const Token& inner_open = cur();
        advance();
        ExprPtr inner = parse_concat(inner_open);
        expect("}");
        return make_replicate(static_cast<int>(*count), inner, span_from(open));
    }
    std::vector<ExprPtr> parts{first};
    while (accept(",")) parts.push_back(parse_expression());
    expect("}");
    return make_concat(std::move(parts), span_from(open));
}

ExprPtr ParserBase::parse_lvalue() {
    const Token& first = cur();
    if (accept("{")) {
        std::vector<ExprPtr> parts{parse_lvalue()};
        while (accept(",")) parts.push_back(parse_lvalue());
        expect("}");
        return make_concat(std::move(parts), span_from(first));
    }
    const Token& id = expect_identifier("signal name");
    ExprPtr base = make_identifier(id.text, token_span(id));
    return parse_selects(base, first);
}

ExprPtr ParserBase::resolve_identifier(const Token& t) {
    return make_identifier(t.text, token_span(t));
}

ExprPtr ParserBase::parse_system_call(const Token& t) {
    throw UnsupportedConstruct("system function " + t.text, token_span(t));
}

} // namespace assertfix::hdl
