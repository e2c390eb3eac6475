#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "assertfix/error.hpp"
#include "assertfix/hdl/expr.hpp"
#include "lexer.hpp"

namespace assertfix::hdl {

/// Token cursor plus the expression grammar shared by the Verilog and SVA parsers.
class ParserBase {
public:
    explicit ParserBase(std::vector<Token> tokens);
    virtual ~ParserBase() = default;

    ExprPtr parse_expression();

protected:
    const Token& cur() const noexcept { return tokens_[index_]; }
    const Token& peek(std::size_t ahead) const noexcept;
    bool at(std::string_view s) const noexcept { return cur().is(s); }
    bool at_end() const noexcept { return cur().kind == TokenKind::End; }
    bool accept(std::string_view s);
    const Token& expect(std::string_view s);
    const Token& expect_identifier(std::string_view what);
    void advance();

    [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected = {}) const;

    /// Span from `first` through the last consumed token.
    SourceSpan span_from(const Token& first) const;
    SourceSpan token_span(const Token& t) const;

    Constant parse_number(const Token& t) const;
    ExprPtr parse_primary();
    ExprPtr parse_lvalue();
    int parse_constant_int(std::string_view what);

    /// Identifier hook: parameter substitution in Verilog.
    virtual ExprPtr resolve_identifier(const Token& t);
    /// System-call hook: $past/$rose/... in SVA, unsupported in Verilog.
    virtual ExprPtr parse_system_call(const Token& t);

    std::vector<Token> tokens_;
    std::size_t index_ = 0;

private:
    ExprPtr parse_binary(int min_prec);
    ExprPtr parse_unary();
    ExprPtr parse_selects(ExprPtr base, const Token& first);
    ExprPtr parse_concat(const Token& open);
};

} // namespace assertfix::hdl
