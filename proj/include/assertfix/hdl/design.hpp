#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "assertfix/hdl/expr.hpp"
#include "assertfix/hdl/source.hpp"

namespace assertfix::hdl {

enum class PortDirection { Input, Output, Inout };
enum class NetKind { Wire, Reg };

/// Declared signal: a port or an internal net. Bit range is [msb:lsb].
struct Signal {
    std::string name;
    NetKind kind = NetKind::Wire;
    std::optional<PortDirection> direction; // set for ports
    int msb = 0;
    int lsb = 0;
    SourceSpan span;

    std::uint32_t width() const noexcept {
        return static_cast<std::uint32_t>(msb >= lsb ? msb - lsb + 1 : lsb - msb + 1);
    }
    bool is_port() const noexcept { return direction.has_value(); }
};

struct Parameter {
    std::string name;
    Constant value;
    bool local = false;
    SourceSpan span;
};

/// One declaration statement (`wire a, b;`, `input [7:0] d;`, `localparam X = 1;`).
struct Declaration {
    enum class Kind { Port, Net, Parameter } kind = Kind::Net;
    std::vector<std::string> names;
    SourceSpan span;
};

struct ContinuousAssign {
    ExprPtr lhs;
    ExprPtr rhs;
    SourceSpan span;
};

struct Statement;
using StatementPtr = std::shared_ptr<const Statement>;

struct CaseItem {
    std::vector<ExprPtr> labels; // empty for default
    StatementPtr body;
    SourceSpan span;
};

struct Statement {
    enum class Kind { Block, If, Case, BlockingAssign, NonblockingAssign, Null } kind = Kind::Null;
    std::vector<StatementPtr> body;  // Block
    ExprPtr cond;                    // If condition, Case subject
    StatementPtr then_branch;        // If
    StatementPtr else_branch;        // If (may be null)
    std::vector<CaseItem> items;     // Case
    ExprPtr lhs;                     // assignments
    ExprPtr rhs;
    SourceSpan span;
};

struct EdgeEvent {
    enum class Edge { Posedge, Negedge } edge = Edge::Posedge;
    std::string signal;
};

struct AlwaysBlock {
    enum class Kind { Sequential, Combinational } kind = Kind::Combinational;
    std::vector<EdgeEvent> edges;        // Sequential: clock first, then async controls
    std::vector<std::string> sensitivity; // explicit combinational list (empty for @*)
    StatementPtr body;
    SourceSpan span;

    bool sequential() const noexcept { return kind == Kind::Sequential; }
    const std::string& clock() const { return edges.front().signal; }
};

struct PortConnection {
    std::string port;  // empty for positional
    ExprPtr expr;      // null for an explicitly open port `.p()`
    SourceSpan span;
};

struct Instance {
    std::string module_name;
    std::string instance_name;
    std::vector<PortConnection> connections;
    SourceSpan span;
};

/// Order-preserving reference to a module item, used for chunking.
struct ItemRef {
    enum class Kind { Declaration, Assign, Always, Instance, Skipped } kind = Kind::Declaration;
    std::size_t index = 0;
    SourceSpan span;
};

struct ModuleAst {
    std::string name;
    int file = 0;
    SourceSpan span;        // `module` through `endmodule`
    SourceSpan header_span; // `module` through the `;` closing the port list
    std::vector<Signal> signals; // ports first in port-list order, then nets in declaration order
    std::vector<Parameter> parameters;
    std::vector<Declaration> declarations;
    std::vector<ContinuousAssign> assigns;
    std::vector<AlwaysBlock> always_blocks;
    std::vector<Instance> instances;
    std::vector<ItemRef> items;

    const Signal* find_signal(const std::string& name) const;
    std::vector<const Signal*> ports() const;
};

struct Diagnostic {
    enum class Severity { Unsupported, Warning } severity = Severity::Warning;
    std::string construct;
    SourceSpan span;
};

struct SourceFile {
    std::string path;
    std::string text;

    /// Text of lines [first, last] (1-based, inclusive) joined with '\n'.
    std::string lines(int first, int last) const;
    int line_count() const;
};

struct DesignAst {
    std::vector<SourceFile> files;
    std::vector<ModuleAst> modules;
    std::vector<Diagnostic> diagnostics;

    const ModuleAst* find_module(const std::string& name) const;
    std::size_t unsupported_count() const;
    /// The module no other module instantiates; first such module if several.
    const ModuleAst& top_module() const;
};

struct ParseOptions {
    /// Throw UnsupportedConstruct on the first construct outside the subset.
    /// When false, the construct is recorded as a diagnostic and skipped.
    bool strict = false;
};

struct SourceInput {
    std::string path;
    std::string text;
};

/// Parse the synthesizable Verilog subset. Throws SyntaxError,
/// UnresolvedIdentifier, and (strict mode) UnsupportedConstruct.
DesignAst parse_design(const std::vector<SourceInput>& sources, const ParseOptions& options = {});
DesignAst parse_design_files(const std::vector<std::string>& paths, const ParseOptions& options = {});

/// Parse a standalone expression (no parameter context). Used by tools and tests.
ExprPtr parse_expression(const std::string& text);

/// Signals read and written by a statement tree.
void collect_statement_signals(const Statement& s, std::set<std::string>& read, std::set<std::string>& written);

} // namespace assertfix::hdl
