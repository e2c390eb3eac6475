#include "lexer.hpp"

#include <array>
#include <cctype>

#include "assertfix/error.hpp"

namespace assertfix::hdl {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Longest first.
constexpr std::array<std::string_view, 26> kSymbols = {
    "<<<", ">>>", "===", "!==", "|->", "|=>",
    "##", "==", "!=", "&&", "||", "<=", ">=", "<<", ">>", "~&", "~|", "~^", "^~", "->", "**", "+:", "-:", "::",
    "@*", "(*",
};

} // namespace

Lexer::Lexer(std::string_view text, int file) : text_(text), file_(file) {}

char Lexer::peek(std::size_t ahead) const noexcept {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
}

void Lexer::advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }
}

SourcePos Lexer::here() const noexcept {
    return SourcePos{file_, line_, column_, pos_};
}

bool Lexer::active() const noexcept {
    for (bool b : cond_stack_) {
        if (!b) return false;
    }
    return true;
}

void Lexer::skip_space_and_comments() {
    while (pos_ < text_.size()) {
        char c = peek();
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance();
        } else if (c == '/' && peek(1) == '/') {
            while (pos_ < text_.size() && peek() != '\n') advance();
        } else if (c == '/' && peek(1) == '*') {
            SourcePos start = here();
            advance(2);
            while (pos_ < text_.size() && !(peek() == '*' && peek(1) == '/')) advance();
            if (pos_ >= text_.size()) throw SyntaxError("unterminated block comment", start);
            advance(2);
        } else {
            return;
        }
    }
}

std::string Lexer::rest_of_line() {
    std::string out;
    while (pos_ < text_.size() && peek() != '\n') {
        if (peek() == '\\' && peek(1) == '\n') {
            advance(2);
            out.push_back(' ');
            continue;
        }
        if (peek() == '/' && peek(1) == '/') {
            while (pos_ < text_.size() && peek() != '\n') advance();
            break;
        }
        out.push_back(peek());
        advance();
    }
    return out;
}

void Lexer::directive(std::vector<Token>& out) {
    SourcePos start = here();
    advance(); // backtick
    std::string name;
    while (is_ident_char(peek())) {
        name.push_back(peek());
        advance();
    }
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    auto word = [&]() {
        while (peek() == ' ' || peek() == '\t') advance();
        std::string w;
        while (is_ident_char(peek())) {
            w.push_back(peek());
            advance();
        }
        return w;
    };
    auto span_to_here = [&]() {
        return SourceSpan{file_, start.line, line_, start.offset, pos_};
    };

    if (name == "ifdef" || name == "ifndef") {
        std::string m = word();
        bool defined = macros_.count(m) > 0;
        bool take = name == "ifdef" ? defined : !defined;
        cond_stack_.push_back(take);
        taken_stack_.push_back(take);
        return;
    }
    if (name == "elsif") {
        std::string m = word();
        if (cond_stack_.empty()) throw SyntaxError("`elsif without `ifdef", start);
        bool take = !taken_stack_.back() && macros_.count(m) > 0;
        cond_stack_.back() = take;
        if (take) taken_stack_.back() = true;
        return;
    }
    if (name == "else") {
        if (cond_stack_.empty()) throw SyntaxError("`else without `ifdef", start);
        cond_stack_.back() = !taken_stack_.back();
        taken_stack_.back() = true;
        return;
    }
    if (name == "endif") {
        if (cond_stack_.empty()) throw SyntaxError("`endif without `ifdef", start);
        cond_stack_.pop_back();
        taken_stack_.pop_back();
        return;
    }
    if (!active()) return;

    if (name == "define") {
        std::string m = word();
        if (peek() == '(') {
            rest_of_line();
            notes_.push_back({"macro with arguments", span_to_here()});
            return;
        }
        macros_[m] = trim(rest_of_line());
        return;
    }
    if (name == "undef") {
        macros_.erase(word());
        return;
    }
    if (name == "timescale" || name == "default_nettype" || name == "celldefine" ||
        name == "endcelldefine" || name == "resetall") {
        rest_of_line();
        return;
    }
    if (name == "include") {
        rest_of_line();
        notes_.push_back({"`include", span_to_here()});
        return;
    }
    auto it = macros_.find(name);
    if (it == macros_.end()) {
        throw SyntaxError("undefined macro `" + name, start);
    }
    Lexer sub(it->second, file_);
    sub.macros_ = macros_;
    for (Token t : sub.tokenize()) {
        if (t.kind == TokenKind::End) break;
        t.pos = start;
        t.end_offset = pos_;
        t.end_line = line_;
        out.push_back(std::move(t));
    }
}

Token Lexer::lex_number() {
    Token t;
    t.kind = TokenKind::Number;
    t.pos = here();
    auto take_digits = [&](bool based) {
        while (true) {
            char c = peek();
            bool ok = std::isdigit(static_cast<unsigned char>(c)) || c == '_';
            if (based) ok = ok || std::isxdigit(static_cast<unsigned char>(c)) || c == 'x' || c == 'X' ||
                            c == 'z' || c == 'Z' || c == '?';
            if (!ok) break;
            t.text.push_back(c);
            advance();
        }
    };
    if (peek() != '\'') take_digits(false);
    if (peek() == '\'') {
        std::size_t save = pos_;
        int save_line = line_, save_col = column_;
        advance();
        char s = peek();
        std::string prefix = "'";
        if (s == 's' || s == 'S') {
            prefix.push_back(s);
            advance();
        }
        char b = peek();
        if (std::string_view("bBoOdDhH").find(b) != std::string_view::npos && b != '\0') {
            prefix.push_back(b);
            advance();
            while (peek() == ' ' || peek() == '\t') advance();
            t.text += prefix;
            take_digits(true);
        } else {
            pos_ = save;
            line_ = save_line;
            column_ = save_col;
        }
    }
    t.end_offset = pos_;
    t.end_line = line_;
    return t;
}

Token Lexer::lex_symbol() {
    Token t;
    t.kind = TokenKind::Symbol;
    t.pos = here();
    for (auto sym : kSymbols) {
        if (text_.substr(pos_, sym.size()) == sym) {
            if (sym == "(*" && peek(2) == ')') continue; // @(*) sensitivity
            t.text = std::string(sym);
            advance(sym.size());
            t.end_offset = pos_;
            t.end_line = line_;
            return t;
        }
    }
    t.text = std::string(1, peek());
    advance();
    t.end_offset = pos_;
    t.end_line = line_;
    return t;
}

std::vector<Token> Lexer::tokenize() {
    std::vector<Token> out;
    while (true) {
        skip_space_and_comments();
        if (pos_ >= text_.size()) break;
        char c = peek();
        if (c == '`') {
            directive(out);
            continue;
        }
        if (!active()) {
            advance();
            continue;
        }
        if (is_ident_start(c)) {
            Token t;
            t.kind = TokenKind::Identifier;
            t.pos = here();
            while (is_ident_char(peek())) {
                t.text.push_back(peek());
                advance();
            }
            t.end_offset = pos_;
            t.end_line = line_;
            out.push_back(std::move(t));
        } else if (c == '\\') {
            Token t;
            t.kind = TokenKind::Identifier;
            t.pos = here();
            advance();
            while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(peek()))) {
                t.text.push_back(peek());
                advance();
            }
            t.end_offset = pos_;
            t.end_line = line_;
            out.push_back(std::move(t));
        } else if (c == '$' && is_ident_start(peek(1))) {
            Token t;
            t.kind = TokenKind::SystemIdentifier;
            t.pos = here();
            t.text.push_back('$');
            advance();
            while (is_ident_char(peek())) {
                t.text.push_back(peek());
                advance();
            }
            t.end_offset = pos_;
            t.end_line = line_;
            out.push_back(std::move(t));
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '\'' && std::string_view("bBoOdDhHsS").find(peek(1)) != std::string_view::npos)) {
            out.push_back(lex_number());
        } else if (c == '"') {
            Token t;
            t.kind = TokenKind::String;
            t.pos = here();
            advance();
            while (pos_ < text_.size() && peek() != '"') {
                if (peek() == '\\') advance();
                t.text.push_back(peek());
                advance();
            }
            if (pos_ >= text_.size()) throw SyntaxError("unterminated string", t.pos);
            advance();
            t.end_offset = pos_;
            t.end_line = line_;
            out.push_back(std::move(t));
        } else {
            out.push_back(lex_symbol());
        }
    }
    if (!cond_stack_.empty()) throw SyntaxError("unterminated `ifdef", here());
    Token end;
    end.kind = TokenKind::End;
    end.pos = here();
    end.end_offset = pos_;
    end.end_line = line_;
    out.push_back(end);
    return out;
}

} // namespace assertfix::hdl
