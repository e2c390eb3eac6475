#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "assertfix/hdl/source.hpp"

namespace assertfix::hdl {

enum class TokenKind { Identifier, SystemIdentifier, Number, String, Symbol, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    SourcePos pos;
    std::size_t end_offset = 0;
    int end_line = 1;

    bool is(std::string_view s) const noexcept {
        return (kind == TokenKind::Symbol || kind == TokenKind::Identifier) && text == s;
    }
};

/// A directive the lexer skipped but that changes meaning (e.g. `include).
struct LexNote {
    std::string construct;
    SourceSpan span;
};

/// Tokenizes Verilog/SVA text. Handles comments and the simple text-macro
/// directives (`define without arguments, `ifdef/`ifndef/`else/`endif);
/// `timescale and friends are skipped.
class Lexer {
public:
    Lexer(std::string_view text, int file);

    std::vector<Token> tokenize();
    const std::vector<LexNote>& notes() const noexcept { return notes_; }

private:
    char peek(std::size_t ahead = 0) const noexcept;
    void advance(std::size_t n = 1);
    SourcePos here() const noexcept;
    void skip_space_and_comments();
    void directive(std::vector<Token>& out);
    std::string rest_of_line();
    Token lex_number();
    Token lex_symbol();
    bool active() const noexcept;

    std::string_view text_;
    int file_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    std::map<std::string, std::string> macros_;
    std::vector<bool> cond_stack_;   // active flag per open `ifdef
    std::vector<bool> taken_stack_;  // whether any branch was taken
    std::vector<LexNote> notes_;
};

} // namespace assertfix::hdl
