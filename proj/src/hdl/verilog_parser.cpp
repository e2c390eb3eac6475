#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "assertfix/error.hpp"
#include "assertfix/hdl/design.hpp"
#include "lexer.hpp"
#include "parser_base.hpp"

namespace assertfix::hdl {

// ---- AST helpers --------------------------------------------------------------

const Signal* ModuleAst::find_signal(const std::string& name) const {
    for (const auto& s : signals) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::vector<const Signal*> ModuleAst::ports() const {
    std::vector<const Signal*> out;
    for (const auto& s : signals) {
        if (s.is_port()) out.push_back(&s);
    }
    return out;
}

std::string SourceFile::lines(int first, int last) const {
    std::string out;
    int line = 1;
    std::size_t pos = 0;
    while (pos <= text.size() && line <= last) {
        std::size_t nl = text.find('\n', pos);
        std::size_t end = nl == std::string::npos ? text.size() : nl;
        if (line >= first) {
            if (!out.empty() || line > first) out.push_back('\n');
            out.append(text, pos, end - pos);
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
        ++line;
    }
    return out;
}

int SourceFile::line_count() const {
    if (text.empty()) return 0;
    int n = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
    return text.back() == '\n' ? n : n + 1;
}

const ModuleAst* DesignAst::find_module(const std::string& name) const {
    for (const auto& m : modules) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

std::size_t DesignAst::unsupported_count() const {
    return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
        return d.severity == Diagnostic::Severity::Unsupported;
    }));
}

const ModuleAst& DesignAst::top_module() const {
    if (modules.empty()) throw Error("design has no modules");
    std::set<std::string> instantiated;
    for (const auto& m : modules) {
        for (const auto& inst : m.instances) instantiated.insert(inst.module_name);
    }
    for (const auto& m : modules) {
        if (!instantiated.count(m.name)) return m;
    }
    return modules.front();
}

void collect_statement_signals(const Statement& s, std::set<std::string>& read, std::set<std::string>& written) {
    auto add_read = [&](const ExprPtr& e) {
        if (!e) return;
        auto sigs = collect_signals(*e);
        read.insert(sigs.begin(), sigs.end());
    };
    switch (s.kind) {
    case Statement::Kind::Block:
        for (const auto& b : s.body) collect_statement_signals(*b, read, written);
        break;
    case Statement::Kind::If:
        add_read(s.cond);
        collect_statement_signals(*s.then_branch, read, written);
        if (s.else_branch) collect_statement_signals(*s.else_branch, read, written);
        break;
    case Statement::Kind::Case:
        add_read(s.cond);
        for (const auto& item : s.items) {
            for (const auto& l : item.labels) add_read(l);
            collect_statement_signals(*item.body, read, written);
        }
        break;
    case Statement::Kind::BlockingAssign:
    case Statement::Kind::NonblockingAssign: {
        add_read(s.rhs);
        visit(*s.lhs, [&](const Expr& x) {
            if (x.kind == ExprKind::BitSelect) add_read(x.operands[1]);
        });
        std::function<void(const Expr&)> targets = [&](const Expr& x) {
            if (x.kind == ExprKind::Concat) {
                for (const auto& p : x.operands) targets(*p);
            } else if (auto b = base_signal(x)) {
                written.insert(*b);
            }
        };
        targets(*s.lhs);
        break;
    }
    case Statement::Kind::Null:
        break;
    }
}

// ---- parser -----------------------------------------------------------------------

namespace {

const std::unordered_set<std::string> kGatePrimitives = {
    "and", "nand", "or", "nor", "xor", "xnor", "not", "buf", "bufif0", "bufif1", "notif0", "notif1",
};

const std::unordered_map<std::string, std::string> kUnsupportedItems = {
    {"initial", "endinitial"}, {"function", "endfunction"}, {"task", "endtask"},
    {"generate", "endgenerate"}, {"specify", "endspecify"}, {"integer", ""}, {"real", ""},
    {"time", ""}, {"genvar", ""}, {"defparam", ""}, {"event", ""}, {"tri", ""}, {"wand", ""},
    {"wor", ""}, {"supply0", ""}, {"supply1", ""}, {"final", ""}, {"property", "endproperty"},
    {"sequence", "endsequence"}, {"assert", ""}, {"assume", ""}, {"cover", ""},
};

class VerilogParser : public ParserBase {
public:
    VerilogParser(std::vector<Token> tokens, const ParseOptions& options, std::vector<Diagnostic>& diags)
        : ParserBase(std::move(tokens)), options_(options), diags_(diags) {}

    std::vector<ModuleAst> parse_file(int file) {
        std::vector<ModuleAst> modules;
        while (!at_end()) {
            if (at("module") || at("macromodule")) {
                modules.push_back(parse_module(file));
            } else if (at("primitive")) {
                const Token& first = cur();
                skip_to_keyword("endprimitive");
                unsupported("user-defined primitive", span_from(first));
            } else {
                fail("unexpected '" + cur().text + "' outside a module", {"module"});
            }
        }
        return modules;
    }

protected:
    ExprPtr resolve_identifier(const Token& t) override {
        if (module_) {
            auto it = params_.find(t.text);
            if (it != params_.end()) return make_constant(it->second, token_span(t));
        }
        return make_identifier(t.text, token_span(t));
    }

private:
    void unsupported(const std::string& construct, const SourceSpan& span) {
        if (options_.strict) throw UnsupportedConstruct(construct, span);
        diags_.push_back(Diagnostic{Diagnostic::Severity::Unsupported, construct, span});
    }

    void warn(const std::string& what, const SourceSpan& span) {
        diags_.push_back(Diagnostic{Diagnostic::Severity::Warning, what, span});
    }

    void skip_to_keyword(std::string_view end_kw) {
        while (!at_end() && !at(end_kw)) advance();
        accept(end_kw);
    }

    void skip_to_semicolon() {
        int depth = 0;
        while (!at_end()) {
            if (at("(") || at("{") || at("[")) ++depth;
            if (at(")") || at("}") || at("]")) --depth;
            if (depth <= 0 && at(";")) {
                advance();
                return;
            }
            advance();
        }
    }

    /// Skip one procedural statement with balanced begin/end and case/endcase.
    void skip_statement() {
        while (at("@") || at("#") || at("@*")) {
            bool event = at("@");
            advance();
            if (at("(")) skip_parens();
            else if (event && at("*")) advance();
            else advance();
        }
        if (at("begin") || at("fork")) {
            int depth = 0;
            while (!at_end()) {
                if (at("begin") || at("fork") || at("case") || at("casez") || at("casex")) ++depth;
                if (at("end") || at("join") || at("endcase")) {
                    --depth;
                    if (depth == 0) {
                        advance();
                        return;
                    }
                }
                advance();
            }
            return;
        }
        if (at("if")) {
            advance();
            skip_parens();
            skip_statement();
            if (accept("else")) skip_statement();
            return;
        }
        if (at("case") || at("casez") || at("casex")) {
            int depth = 0;
            while (!at_end()) {
                if (at("case") || at("casez") || at("casex")) ++depth;
                if (at("endcase") && --depth == 0) {
                    advance();
                    return;
                }
                advance();
            }
            return;
        }
        if (at("for") || at("while") || at("repeat")) {
            advance();
            skip_parens();
            skip_statement();
            return;
        }
        if (at("forever")) {
            advance();
            skip_statement();
            return;
        }
        skip_to_semicolon();
    }

    void skip_parens() {
        if (!at("(")) return;
        int depth = 0;
        while (!at_end()) {
            if (at("(")) ++depth;
            if (at(")") && --depth == 0) {
                advance();
                return;
            }
            advance();
        }
    }

    // ---- module ---------------------------------------------------------------

    ModuleAst parse_module(int file) {
        ModuleAst m;
        module_ = &m;
        params_.clear();
        port_order_.clear();
        m.file = file;
        const Token& first = cur();
        advance();
        m.name = expect_identifier("module name").text;
        if (accept("#")) {
            expect("(");
            if (!at(")")) {
                do {
                    accept("parameter");
                    parse_parameter_assignment(false, first);
                } while (accept(","));
            }
            expect(")");
        }
        if (accept("(")) {
            if (!at(")")) {
                if (at("input") || at("output") || at("inout")) {
                    parse_ansi_ports();
                } else {
                    do {
                        port_order_.push_back(expect_identifier("port name").text);
                    } while (accept(","));
                }
            }
            expect(")");
        }
        expect(";");
        m.header_span = span_from(first);

        while (!at("endmodule")) {
            if (at_end()) fail("missing endmodule", {"endmodule"});
            parse_item();
        }
        advance();
        m.span = span_from(first);
        finish_module(m);
        module_ = nullptr;
        return m;
    }

    void finish_module(ModuleAst& m) {
        // Non-ANSI: every header port needs a direction declaration.
        if (!port_order_.empty()) {
            std::vector<Signal> ordered;
            for (const auto& name : port_order_) {
                auto it = std::find_if(m.signals.begin(), m.signals.end(),
                                       [&](const Signal& s) { return s.name == name && s.is_port(); });
                if (it == m.signals.end()) throw UnresolvedIdentifier(name, m.name, m.header_span);
                ordered.push_back(*it);
            }
            for (const auto& s : m.signals) {
                if (!s.is_port()) ordered.push_back(s);
            }
            for (const auto& s : m.signals) {
                if (s.is_port() && std::find(port_order_.begin(), port_order_.end(), s.name) == port_order_.end()) {
                    throw UnresolvedIdentifier(s.name, m.name, s.span);
                }
            }
            m.signals = std::move(ordered);
        }
        resolve_identifiers(m);
    }

    void check_expr(const ModuleAst& m, const ExprPtr& e) {
        if (!e) return;
        visit(*e, [&](const Expr& x) {
            if (x.kind == ExprKind::Identifier && !m.find_signal(x.name)) {
                throw UnresolvedIdentifier(x.name, m.name, x.span);
            }
        });
    }

    void check_statement(const ModuleAst& m, const Statement& s) {
        check_expr(m, s.cond);
        check_expr(m, s.lhs);
        check_expr(m, s.rhs);
        for (const auto& b : s.body) check_statement(m, *b);
        if (s.then_branch) check_statement(m, *s.then_branch);
        if (s.else_branch) check_statement(m, *s.else_branch);
        for (const auto& item : s.items) {
            for (const auto& l : item.labels) check_expr(m, l);
            check_statement(m, *item.body);
        }
    }

    void resolve_identifiers(const ModuleAst& m) {
        for (const auto& a : m.assigns) {
            check_expr(m, a.lhs);
            check_expr(m, a.rhs);
        }
        for (const auto& blk : m.always_blocks) {
            for (const auto& e : blk.edges) {
                if (!m.find_signal(e.signal)) throw UnresolvedIdentifier(e.signal, m.name, blk.span);
            }
            for (const auto& s : blk.sensitivity) {
                if (!m.find_signal(s)) throw UnresolvedIdentifier(s, m.name, blk.span);
            }
            check_statement(m, *blk.body);
        }
        for (const auto& inst : m.instances) {
            for (const auto& c : inst.connections) check_expr(m, c.expr);
        }
    }

    std::pair<int, int> parse_range() {
        expect("[");
        int msb = parse_constant_int("range bound");
        expect(":");
        int lsb = parse_constant_int("range bound");
        expect("]");
        return {msb, lsb};
    }

    void add_signal(Signal s) {
        auto& sigs = module_->signals;
        auto it = std::find_if(sigs.begin(), sigs.end(), [&](const Signal& x) { return x.name == s.name; });
        if (it == sigs.end()) {
            sigs.push_back(std::move(s));
            return;
        }
        // `output q; reg q;` and similar split declarations merge.
        if (s.kind == NetKind::Reg) it->kind = NetKind::Reg;
        if (s.direction) it->direction = s.direction;
        if (s.msb != 0 || s.lsb != 0) {
            it->msb = s.msb;
            it->lsb = s.lsb;
        }
    }

    void parse_ansi_ports() {
        std::optional<PortDirection> dir;
        NetKind kind = NetKind::Wire;
        int msb = 0, lsb = 0;
        do {
            const Token& first = cur();
            if (at("input") || at("output") || at("inout")) {
                dir = at("input") ? PortDirection::Input : at("output") ? PortDirection::Output : PortDirection::Inout;
                advance();
                kind = NetKind::Wire;
                msb = lsb = 0;
                if (accept("reg") || accept("logic")) kind = NetKind::Reg;
                else accept("wire");
                if (at("signed")) {
                    unsupported("signed port", token_span(cur()));
                    advance();
                }
                if (at("[")) std::tie(msb, lsb) = parse_range();
            }
            if (!dir) fail("port direction expected", {"input", "output", "inout"});
            const Token& name = expect_identifier("port name");
            Signal s{name.text, kind, dir, msb, lsb, span_from(first)};
            add_signal(s);
            module_->declarations.push_back({Declaration::Kind::Port, {name.text}, span_from(first)});
        } while (accept(","));
        // ANSI declarations live in the header; they are not separate items.
        module_->declarations.clear();
    }

    void parse_parameter_assignment(bool local, const Token& decl_first) {
        if (at("[")) parse_range();
        if (at("integer") || at("signed")) advance();
        const Token& name = expect_identifier("parameter name");
        expect("=");
        ExprPtr value = parse_expression();
        Constant c;
        if (value->is_constant()) {
            c = value->constant;
        } else if (auto v = fold_constant(*value)) {
            c = Constant{32, static_cast<std::uint64_t>(*v), false, 'd'};
        } else {
            throw UnsupportedConstruct("non-constant parameter value", span_from(name));
        }
        params_[name.text] = c;
        module_->parameters.push_back(Parameter{name.text, c, local, span_from(decl_first)});
    }

    void record_item(ItemRef::Kind kind, std::size_t index, const SourceSpan& span) {
        module_->items.push_back(ItemRef{kind, index, span});
    }

    void parse_item() {
        const Token& first = cur();
        std::size_t start_index = index_;
        try {
            parse_item_inner(first);
        } catch (const UnsupportedConstruct& e) {
            if (options_.strict) throw;
            index_ = start_index;
            skip_item();
            unsupported(e.construct(), span_from(first));
            record_item(ItemRef::Kind::Skipped, 0, span_from(first));
        }
    }

    void skip_item() {
        for (const auto& [kw, end_kw] : kUnsupportedItems) {
            if (at(kw)) {
                if (kw == "initial" || kw == "final") {
                    advance();
                    skip_statement();
                } else if (!end_kw.empty()) {
                    skip_to_keyword(end_kw);
                } else {
                    skip_to_semicolon();
                }
                return;
            }
        }
        if (at("always") || at("always_ff") || at("always_comb") || at("always_latch")) {
            advance();
            skip_statement();
            return;
        }
        skip_to_semicolon();
    }

    void parse_item_inner(const Token& first) {
        if (at("input") || at("output") || at("inout")) {
            parse_port_declaration(first);
            return;
        }
        if (at("wire") || at("reg") || at("logic")) {
            parse_net_declaration(first);
            return;
        }
        if (at("parameter") || at("localparam")) {
            bool local = at("localparam");
            advance();
            std::vector<std::string> names;
            do {
                parse_parameter_assignment(local, first);
                names.push_back(module_->parameters.back().name);
            } while (accept(","));
            expect(";");
            module_->declarations.push_back({Declaration::Kind::Parameter, names, span_from(first)});
            record_item(ItemRef::Kind::Declaration, module_->declarations.size() - 1, span_from(first));
            return;
        }
        if (at("assign")) {
            advance();
            if (at("#")) {
                advance();
                parse_primary();
            }
            do {
                const Token& a_first = cur();
                ExprPtr lhs = parse_lvalue();
                expect("=");
                ExprPtr rhs = parse_expression();
                module_->assigns.push_back(ContinuousAssign{lhs, rhs, span_from(a_first)});
            } while (accept(","));
            expect(";");
            // The whole statement is the item; widen each assign's span to it.
            record_item(ItemRef::Kind::Assign, module_->assigns.size() - 1, span_from(first));
            module_->assigns.back().span = span_from(first);
            return;
        }
        if (at("always") || at("always_ff") || at("always_comb") || at("always_latch")) {
            parse_always(first);
            return;
        }
        if (at("(*")) throw UnsupportedConstruct("attribute", token_span(cur()));
        for (const auto& [kw, end_kw] : kUnsupportedItems) {
            if (at(kw)) throw UnsupportedConstruct(kw, token_span(cur()));
        }
        if (cur().kind == TokenKind::Identifier) {
            if (kGatePrimitives.count(cur().text)) throw UnsupportedConstruct("gate primitive " + cur().text, token_span(cur()));
            parse_instance(first);
            return;
        }
        if (accept(";")) return;
        fail("unexpected '" + cur().text + "' in module body", {"declaration", "assign", "always", "instance"});
    }

    void parse_port_declaration(const Token& first) {
        PortDirection dir = at("input") ? PortDirection::Input : at("output") ? PortDirection::Output : PortDirection::Inout;
        advance();
        NetKind kind = NetKind::Wire;
        if (accept("reg") || accept("logic")) kind = NetKind::Reg;
        else accept("wire");
        if (at("signed")) throw UnsupportedConstruct("signed port", token_span(cur()));
        int msb = 0, lsb = 0;
        if (at("[")) std::tie(msb, lsb) = parse_range();
        std::vector<std::string> names;
        do {
            const Token& name = expect_identifier("port name");
            add_signal(Signal{name.text, kind, dir, msb, lsb, span_from(first)});
            names.push_back(name.text);
        } while (accept(","));
        expect(";");
        module_->declarations.push_back({Declaration::Kind::Port, names, span_from(first)});
        record_item(ItemRef::Kind::Declaration, module_->declarations.size() - 1, span_from(first));
    }

    void parse_net_declaration(const Token& first) {
        NetKind kind = at("wire") ? NetKind::Wire : NetKind::Reg;
        advance();
        if (at("signed")) throw UnsupportedConstruct("signed net", token_span(cur()));
        int msb = 0, lsb = 0;
        if (at("[")) std::tie(msb, lsb) = parse_range();
        std::vector<std::string> names;
        std::vector<ContinuousAssign> inits;
        do {
            const Token& name = expect_identifier("net name");
            if (at("[")) throw UnsupportedConstruct("memory declaration", token_span(cur()));
            add_signal(Signal{name.text, kind, std::nullopt, msb, lsb, span_from(first)});
            names.push_back(name.text);
            if (accept("=")) {
                if (kind == NetKind::Reg) throw UnsupportedConstruct("reg initializer", span_from(name));
                ExprPtr rhs = parse_expression();
                inits.push_back(ContinuousAssign{make_identifier(name.text, token_span(name)), rhs, span_from(name)});
            }
        } while (accept(","));
        expect(";");
        module_->declarations.push_back({Declaration::Kind::Net, names, span_from(first)});
        record_item(ItemRef::Kind::Declaration, module_->declarations.size() - 1, span_from(first));
        for (auto& init : inits) {
            init.span = span_from(first);
            module_->assigns.push_back(init);
        }
        if (!inits.empty()) {
            // A declaration with initializer drives the net; chunking sees it as an assign.
            module_->items.back() = ItemRef{ItemRef::Kind::Assign, module_->assigns.size() - 1, span_from(first)};
            module_->declarations.back().kind = Declaration::Kind::Net;
            decl_with_init_.insert(module_->assigns.size() - 1);
        }
    }

    void parse_always(const Token& first) {
        AlwaysBlock blk;
        std::string kw = cur().text;
        advance();
        if (kw == "always_latch") throw UnsupportedConstruct("always_latch", token_span(first));
        if (kw == "always_comb") {
            blk.kind = AlwaysBlock::Kind::Combinational;
        } else {
            if (accept("@*")) {
                blk.kind = AlwaysBlock::Kind::Combinational;
            } else {
                expect("@");
                if (accept("*")) {
                    blk.kind = AlwaysBlock::Kind::Combinational;
                } else {
                    expect("(");
                    if (accept("*")) {
                        blk.kind = AlwaysBlock::Kind::Combinational;
                    } else {
                        do {
                            if (at("posedge") || at("negedge")) {
                                auto edge = at("posedge") ? EdgeEvent::Edge::Posedge : EdgeEvent::Edge::Negedge;
                                advance();
                                blk.edges.push_back({edge, expect_identifier("signal").text});
                            } else {
                                blk.sensitivity.push_back(expect_identifier("signal").text);
                            }
                        } while (accept("or") || accept(","));
                        if (!blk.edges.empty() && !blk.sensitivity.empty()) {
                            throw UnsupportedConstruct("mixed edge and level sensitivity", span_from(first));
                        }
                        blk.kind = blk.edges.empty() ? AlwaysBlock::Kind::Combinational : AlwaysBlock::Kind::Sequential;
                    }
                    expect(")");
                }
            }
        }
        if (kw == "always_ff" && blk.kind != AlwaysBlock::Kind::Sequential) {
            fail("always_ff requires an edge sensitivity list");
        }
        blk.body = parse_statement();
        blk.span = span_from(first);
        module_->always_blocks.push_back(std::move(blk));
        record_item(ItemRef::Kind::Always, module_->always_blocks.size() - 1, span_from(first));
    }

    StatementPtr parse_statement() {
        const Token& first = cur();
        auto s = std::make_shared<Statement>();
        if (accept(";")) {
            s->kind = Statement::Kind::Null;
            s->span = span_from(first);
            return s;
        }
        if (accept("begin")) {
            if (accept(":")) expect_identifier("block label");
            s->kind = Statement::Kind::Block;
            while (!at("end")) {
                if (at_end()) fail("missing end", {"end"});
                s->body.push_back(parse_statement());
            }
            advance();
            if (accept(":")) expect_identifier("block label");
            s->span = span_from(first);
            return s;
        }
        if (accept("if")) {
            s->kind = Statement::Kind::If;
            expect("(");
            s->cond = parse_expression();
            expect(")");
            s->then_branch = parse_statement();
            if (accept("else")) s->else_branch = parse_statement();
            s->span = span_from(first);
            return s;
        }
        if (at("unique") || at("priority")) advance();
        if (at("case") || at("casez") || at("casex")) {
            advance();
            s->kind = Statement::Kind::Case;
            expect("(");
            s->cond = parse_expression();
            expect(")");
            bool seen_default = false;
            while (!at("endcase")) {
                if (at_end()) fail("missing endcase", {"endcase"});
                const Token& item_first = cur();
                CaseItem item;
                if (accept("default")) {
                    if (seen_default) fail("duplicate default case item");
                    seen_default = true;
                    accept(":");
                } else {
                    do {
                        item.labels.push_back(parse_expression());
                    } while (accept(","));
                    expect(":");
                }
                item.body = parse_statement();
                item.span = span_from(item_first);
                s->items.push_back(std::move(item));
            }
            advance();
            s->span = span_from(first);
            return s;
        }
        static const std::set<std::string> unsupported_stmts = {
            "for", "while", "repeat", "forever", "wait", "disable", "fork", "force", "release", "deassign",
        };
        if (cur().kind == TokenKind::Identifier && unsupported_stmts.count(cur().text)) {
            throw UnsupportedConstruct(cur().text + " statement", token_span(cur()));
        }
        if (cur().kind == TokenKind::SystemIdentifier) {
            throw UnsupportedConstruct("system task " + cur().text, token_span(cur()));
        }
        if (at("#") || at("@")) throw UnsupportedConstruct("procedural timing control", token_span(cur()));

        s->lhs = parse_lvalue();
        if (accept("<=")) {
            s->kind = Statement::Kind::NonblockingAssign;
        } else if (accept("=")) {
            s->kind = Statement::Kind::BlockingAssign;
        } else {
            fail("unexpected '" + cur().text + "'", {"'='", "'<='"});
        }
        if (accept("#")) parse_primary(); // intra-assignment delay: no effect on cycle semantics
        s->rhs = parse_expression();
        expect(";");
        s->span = span_from(first);
        return s;
    }

    void parse_instance(const Token& first) {
        Instance inst;
        inst.module_name = expect_identifier("module name").text;
        if (accept("#")) {
            const Token& p = cur();
            skip_parens();
            warn("parameter override on instance (defaults used)", span_from(p));
        }
        inst.instance_name = expect_identifier("instance name").text;
        if (at("[")) throw UnsupportedConstruct("instance array", token_span(cur()));
        expect("(");
        if (!at(")")) {
            do {
                const Token& c_first = cur();
                PortConnection c;
                if (accept(".")) {
                    c.port = expect_identifier("port name").text;
                    expect("(");
                    if (!at(")")) c.expr = parse_expression();
                    expect(")");
                } else {
                    c.expr = parse_expression();
                }
                c.span = span_from(c_first);
                inst.connections.push_back(std::move(c));
            } while (accept(","));
        }
        expect(")");
        expect(";");
        inst.span = span_from(first);
        module_->instances.push_back(std::move(inst));
        record_item(ItemRef::Kind::Instance, module_->instances.size() - 1, span_from(first));
    }

    const ParseOptions& options_;
    std::vector<Diagnostic>& diags_;
    ModuleAst* module_ = nullptr;
    std::unordered_map<std::string, Constant> params_;
    std::vector<std::string> port_order_;
    std::set<std::size_t> decl_with_init_;
};

void check_instances(DesignAst& design, const ParseOptions& options) {
    for (auto& m : design.modules) {
        std::vector<Instance> kept;
        for (auto& inst : m.instances) {
            const ModuleAst* child = design.find_module(inst.module_name);
            if (!child) {
                if (options.strict) throw UnsupportedConstruct("instance of undefined module " + inst.module_name, inst.span);
                design.diagnostics.push_back(
                    {Diagnostic::Severity::Unsupported, "instance of undefined module " + inst.module_name, inst.span});
                continue;
            }
            for (const auto& c : inst.connections) {
                if (!c.port.empty()) {
                    const Signal* p = child->find_signal(c.port);
                    if (!p || !p->is_port()) throw UnresolvedIdentifier(c.port, child->name, c.span);
                }
            }
            if (inst.connections.size() > child->ports().size()) {
                throw SyntaxError("too many connections for instance " + inst.instance_name,
                                  SourcePos{inst.span.file, inst.span.begin_line, 1, inst.span.begin});
            }
            kept.push_back(inst);
        }
        if (kept.size() != m.instances.size()) {
            // Re-point instance items at the kept list; dropped ones become skipped items.
            std::vector<ItemRef> items;
            std::size_t next = 0;
            for (auto item : m.items) {
                if (item.kind == ItemRef::Kind::Instance) {
                    const auto& orig = m.instances[item.index];
                    bool still = next < kept.size() && kept[next].instance_name == orig.instance_name &&
                                 kept[next].span.begin == orig.span.begin;
                    if (still) {
                        item.index = next++;
                    } else {
                        item.kind = ItemRef::Kind::Skipped;
                        item.index = 0;
                    }
                }
                items.push_back(item);
            }
            m.items = std::move(items);
            m.instances = std::move(kept);
        }
    }
}

} // namespace

DesignAst parse_design(const std::vector<SourceInput>& sources, const ParseOptions& options) {
    DesignAst design;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto& src = sources[i];
        design.files.push_back(SourceFile{src.path, src.text});
        int file = static_cast<int>(i);
        Lexer lexer(src.text, file);
        auto tokens = lexer.tokenize();
        for (const auto& note : lexer.notes()) {
            if (options.strict) throw UnsupportedConstruct(note.construct, note.span);
            design.diagnostics.push_back({Diagnostic::Severity::Unsupported, note.construct, note.span});
        }
        VerilogParser parser(std::move(tokens), options, design.diagnostics);
        for (auto& m : parser.parse_file(file)) {
            if (design.find_module(m.name)) {
                throw SyntaxError("duplicate module '" + m.name + "'",
                                  SourcePos{file, m.span.begin_line, 1, m.span.begin});
            }
            design.modules.push_back(std::move(m));
        }
    }
    check_instances(design, options);
    return design;
}

DesignAst parse_design_files(const std::vector<std::string>& paths, const ParseOptions& options) {
    std::vector<SourceInput> sources;
    for (const auto& p : paths) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw IoError("cannot read '" + p + "'");
        std::ostringstream os;
        os << in.rdbuf();
        sources.push_back({p, os.str()});
    }
    return parse_design(sources, options);
}

ExprPtr parse_expression(const std::string& text) {
    Lexer lexer(text, 0);
    ParserBase parser(lexer.tokenize());
    return parser.parse_expression();
}

} // namespace assertfix::hdl
