#include "assertfix/hdl/sva.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "assertfix/error.hpp"
#include "lexer.hpp"
#include "parser_base.hpp"

namespace assertfix::hdl {

std::vector<int> SvaAssertion::delays() const {
    std::vector<int> out;
    for (const auto& s : consequent) out.push_back(s.delay);
    return out;
}

int SvaAssertion::step_offset(std::size_t j) const {
    int off = implication == Implication::NonOverlapped && antecedent ? 1 : 0;
    for (std::size_t i = 0; i <= j && i < consequent.size(); ++i) off += consequent[i].delay;
    return off;
}

int SvaAssertion::window() const {
    return consequent.empty() ? 0 : step_offset(consequent.size() - 1);
}

std::set<std::string> SvaAssertion::antecedent_signals() const {
    return antecedent ? collect_signals(*antecedent) : std::set<std::string>{};
}

std::set<std::string> SvaAssertion::consequent_signals() const {
    std::set<std::string> out;
    for (const auto& s : consequent) {
        auto sigs = collect_signals(*s.expr);
        out.insert(sigs.begin(), sigs.end());
    }
    return out;
}

std::set<std::string> SvaAssertion::signals() const {
    auto out = antecedent_signals();
    auto cons = consequent_signals();
    out.insert(cons.begin(), cons.end());
    if (disable) {
        auto d = collect_signals(*disable);
        out.insert(d.begin(), d.end());
    }
    return out;
}

bool operator==(const SvaAssertion& a, const SvaAssertion& b) {
    if (a.name != b.name || a.clock != b.clock || a.implication != b.implication) return false;
    if (!same_expr(a.disable, b.disable) || !same_expr(a.antecedent, b.antecedent)) return false;
    if (a.consequent.size() != b.consequent.size()) return false;
    for (std::size_t i = 0; i < a.consequent.size(); ++i) {
        if (a.consequent[i].delay != b.consequent[i].delay) return false;
        if (!same_expr(a.consequent[i].expr, b.consequent[i].expr)) return false;
    }
    return true;
}

namespace {

const std::set<std::string> kUnsupportedKeywords = {
    "throughout", "within", "intersect", "and", "or", "not", "until", "s_until", "until_with",
    "s_until_with", "s_eventually", "eventually", "always", "s_always", "nexttime", "s_nexttime",
    "first_match", "implies", "iff", "strong", "weak", "accept_on", "reject_on", "sync_accept_on",
    "sync_reject_on", "if", "case",
};

class SvaParser : public ParserBase {
public:
    explicit SvaParser(std::vector<Token> tokens) : ParserBase(std::move(tokens)) {}

    SvaAssertion parse() {
        prescan();
        SvaAssertion a;
        if (cur().kind == TokenKind::Identifier && peek(1).is(":") && peek(2).is("assert")) {
            a.name = cur().text;
            advance();
            advance();
        }
        if (accept("assert")) {
            expect("property");
            expect("(");
            parse_spec(a);
            expect(")");
            if (at("else")) unsupported("action block");
            accept(";");
        } else {
            if (a.name) fail("expected 'assert'");
            parse_spec(a);
            accept(";");
        }
        if (!at_end()) fail("unexpected '" + cur().text + "' after assertion", {"end of assertion"});
        return a;
    }

protected:
    ExprPtr parse_system_call(const Token& t) override {
        const std::string& fn = t.text;
        if (fn != "$past" && fn != "$rose" && fn != "$fell" && fn != "$stable") {
            unsupported_at("system function " + fn, t.pos);
        }
        expect("(");
        ExprPtr arg = parse_expression();
        if (fn == "$past") {
            int depth = 1;
            if (accept(",")) {
                if (cur().kind != TokenKind::Number) unsupported("non-constant $past depth");
                const Token& n = cur();
                advance();
                Constant c = parse_number(n);
                if (c.value < 1) unsupported_at("$past depth 0", n.pos);
                if (c.value > 1024) unsupported_at("$past depth above 1024", n.pos);
                depth = static_cast<int>(c.value);
                if (at(",")) unsupported("$past with gating or clocking arguments");
            }
            expect(")");
            return make_past(arg, depth, span_from(t));
        }
        if (at(",")) unsupported("clocking argument to " + fn);
        expect(")");
        return make_system_call(fn, {arg}, span_from(t));
    }

private:
    [[noreturn]] void unsupported(const std::string& what) { throw UnsupportedSvaFeature(what, cur().pos); }
    [[noreturn]] void unsupported_at(const std::string& what, const SourcePos& pos) {
        throw UnsupportedSvaFeature(what, pos);
    }

    /// Reject out-of-subset operators before structural parsing so the error
    /// names the feature rather than a confusing syntax error.
    void prescan() {
        for (std::size_t i = 0; i + 1 < tokens_.size(); ++i) {
            const Token& t = tokens_[i];
            const Token& n = tokens_[i + 1];
            if (t.is("[") && (n.is("*") || n.is("=") || n.is("->"))) {
                throw UnsupportedSvaFeature("repetition operator [" + n.text + "n]", t.pos);
            }
            if (t.is("##") && (n.is("[") || n.is("("))) {
                throw UnsupportedSvaFeature("ranged or expression delay ##" + n.text, t.pos);
            }
            bool disable_iff = t.is("iff") && i > 0 && tokens_[i - 1].is("disable");
            if (t.kind == TokenKind::Identifier && kUnsupportedKeywords.count(t.text) && !disable_iff) {
                throw UnsupportedSvaFeature("sequence/property operator '" + t.text + "'", t.pos);
            }
            if (t.is("##") && n.kind == TokenKind::Identifier) {
                throw UnsupportedSvaFeature("non-literal delay ##" + n.text, t.pos);
            }
        }
    }

    void parse_spec(SvaAssertion& a) {
        if (accept("@")) {
            expect("(");
            ClockEvent clk;
            if (accept("posedge")) {
                clk.edge = ClockEvent::Edge::Posedge;
            } else if (accept("negedge")) {
                clk.edge = ClockEvent::Edge::Negedge;
            } else {
                unsupported("clock event without posedge/negedge");
            }
            clk.signal = expect_identifier("clock signal").text;
            if (!at(")")) unsupported("compound clocking event");
            expect(")");
            a.clock = clk;
        }
        if (accept("disable")) {
            expect("iff");
            expect("(");
            a.disable = parse_expression();
            expect(")");
        }
        parse_property(a);
    }

    /// True if a `(` at the cursor encloses a whole property (contains |-> or ##
    /// at its own nesting level).
    bool paren_wraps_property() const {
        if (!at("(")) return false;
        int depth = 0;
        bool found = false;
        std::size_t i = index_;
        for (; i < tokens_.size(); ++i) {
            const Token& t = tokens_[i];
            if (t.is("(")) ++depth;
            if (t.is(")")) {
                if (--depth == 0) break;
            }
            if (depth == 1 && (t.is("|->") || t.is("|=>") || t.is("##"))) found = true;
        }
        if (!found || i >= tokens_.size()) return false;
        // The closing paren must end the property.
        const Token& after = tokens_[i + 1 < tokens_.size() ? i + 1 : i];
        return after.is(")") || after.is(";") || after.kind == TokenKind::End;
    }

    void parse_property(SvaAssertion& a) {
        if (paren_wraps_property()) {
            advance();
            parse_property(a);
            expect(")");
            return;
        }
        std::vector<SequenceStep> first = parse_sequence();
        if (at("|->") || at("|=>")) {
            if (first.size() != 1 || first[0].delay != 0) unsupported("sequence antecedent");
            a.antecedent = first[0].expr;
            a.implication = at("|->") ? Implication::Overlapped : Implication::NonOverlapped;
            advance();
            if (paren_wraps_property()) {
                // `a |-> (##1 b)`
                advance();
                a.consequent = parse_sequence();
                expect(")");
            } else {
                a.consequent = parse_sequence();
            }
            if (at("|->") || at("|=>")) unsupported("nested implication");
        } else {
            a.consequent = std::move(first);
        }
    }

    std::vector<SequenceStep> parse_sequence() {
        std::vector<SequenceStep> steps;
        do {
            SequenceStep s;
            if (accept("##")) {
                if (cur().kind != TokenKind::Number) fail("expected delay after ##", {"number"});
                const Token& n = cur();
                advance();
                Constant c = parse_number(n);
                if (c.value > 1024) unsupported_at("delay above 1024", n.pos);
                s.delay = static_cast<int>(c.value);
            } else if (!steps.empty()) {
                break;
            }
            s.expr = parse_expression();
            steps.push_back(std::move(s));
        } while (at("##"));
        return steps;
    }
};

bool is_primary(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Identifier:
    case ExprKind::Constant:
    case ExprKind::BitSelect:
    case ExprKind::PartSelect:
    case ExprKind::Concat:
    case ExprKind::Replicate:
    case ExprKind::SystemCall:
        return true;
    default:
        return false;
    }
}

std::string operand(const Expr& e) {
    return is_primary(e) ? render_expr(e) : "(" + render_expr(e) + ")";
}

} // namespace

SvaAssertion parse_assertion(const std::string& text) {
    Lexer lexer(text, 0);
    SvaParser parser(lexer.tokenize());
    return parser.parse();
}

std::string render_property(const SvaAssertion& a) {
    std::string out;
    if (a.antecedent) {
        out += operand(*a.antecedent);
        out += a.implication == Implication::Overlapped ? " |-> " : " |=> ";
    }
    for (std::size_t i = 0; i < a.consequent.size(); ++i) {
        const auto& s = a.consequent[i];
        if (i > 0) out.push_back(' ');
        if (s.delay != 0 || i > 0) out += "##" + std::to_string(s.delay) + " ";
        out += operand(*s.expr);
    }
    return out;
}

std::string render_assertion(const SvaAssertion& a) {
    std::string out;
    if (a.name) out += *a.name + ": ";
    out += "assert property (";
    if (a.clock) {
        out += a.clock->edge == ClockEvent::Edge::Posedge ? "@(posedge " : "@(negedge ";
        out += a.clock->signal + ") ";
    }
    if (a.disable) out += "disable iff (" + render_expr(*a.disable) + ") ";
    out += render_property(a);
    out += ");";
    return out;
}

std::vector<NamedAssertion> parse_assertion_list(const std::string& text, bool json) {
    std::vector<NamedAssertion> out;
    std::set<std::string> names;
    auto add = [&](std::optional<std::string> name, const std::string& body) {
        NamedAssertion n;
        n.assertion = parse_assertion(body);
        n.text = body;
        n.name = name ? *name : n.assertion.name ? *n.assertion.name : "a" + std::to_string(out.size());
        if (!names.insert(n.name).second) throw ConfigError("duplicate assertion name '" + n.name + "'");
        out.push_back(std::move(n));
    };
    if (json) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("assertion list is not valid JSON: ") + e.what());
        }
        if (!doc.is_array()) throw ConfigError("assertion list JSON must be an array");
        for (const auto& item : doc) {
            if (!item.is_object() || !item.contains("text") || !item["text"].is_string()) {
                throw ConfigError("assertion list entries need a string \"text\"");
            }
            std::optional<std::string> name;
            if (item.contains("name")) name = item["name"].get<std::string>();
            add(name, item["text"].get<std::string>());
        }
        return out;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        std::string body = line.substr(b, e - b + 1);
        if (body.rfind("//", 0) == 0 || body[0] == '#') continue;
        add(std::nullopt, body);
    }
    return out;
}

std::vector<NamedAssertion> load_assertions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    std::string text = os.str();
    auto first = text.find_first_not_of(" \t\r\n");
    bool json = first != std::string::npos && text[first] == '[';
    return parse_assertion_list(text, json);
}

} // namespace assertfix::hdl
