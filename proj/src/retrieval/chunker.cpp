#include <algorithm>
#include <sstream>

#include "assertfix/retrieval/retrieval.hpp"

namespace assertfix::retrieval {

using hdl::ItemRef;
using hdl::ModuleAst;

std::string_view to_string(ChunkKind k) noexcept {
    switch (k) {
    case ChunkKind::Declarations: return "declarations";
    case ChunkKind::Assigns: return "assigns";
    case ChunkKind::Always: return "always";
    case ChunkKind::Instance: return "instance";
    case ChunkKind::Skipped: return "skipped";
    }
    return "?";
}

std::string RtlChunk::numbered_text() const {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    int n = start_line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!first) out << '\n';
        first = false;
        out << n++ << ": " << line;
    }
    return out.str();
}

namespace {

struct Group {
    ChunkKind kind;
    int first_line;
    int last_line;
    bool header = false;
    std::vector<const ItemRef*> items;
};

ChunkKind kind_of(ItemRef::Kind k) {
    switch (k) {
    case ItemRef::Kind::Declaration: return ChunkKind::Declarations;
    case ItemRef::Kind::Assign: return ChunkKind::Assigns;
    case ItemRef::Kind::Always: return ChunkKind::Always;
    case ItemRef::Kind::Instance: return ChunkKind::Instance;
    case ItemRef::Kind::Skipped: return ChunkKind::Skipped;
    }
    return ChunkKind::Skipped;
}

std::vector<Group> group_items(const ModuleAst& m) {
    std::vector<Group> groups;
    groups.push_back(Group{ChunkKind::Declarations, m.header_span.begin_line, m.header_span.end_line, true, {}});
    for (const auto& item : m.items) {
        ChunkKind k = kind_of(item.kind);
        Group& last = groups.back();
        bool same_line = item.span.begin_line <= last.last_line;
        bool run = (k == ChunkKind::Declarations || k == ChunkKind::Assigns) && last.kind == k;
        if (same_line || run) {
            if (same_line && last.kind == ChunkKind::Declarations && k != ChunkKind::Declarations) last.kind = k;
            last.last_line = std::max(last.last_line, item.span.end_line);
            last.items.push_back(&item);
        } else {
            groups.push_back(Group{k, item.span.begin_line, item.span.end_line, false, {&item}});
        }
    }
    return groups;
}

void add_assignment_signals(const hdl::ExprPtr& lhs, const hdl::ExprPtr& rhs, RtlChunk& c) {
    hdl::Statement s;
    s.kind = hdl::Statement::Kind::BlockingAssign;
    s.lhs = lhs;
    s.rhs = rhs;
    hdl::collect_statement_signals(s, c.used, c.defined);
}

void add_item_signals(const hdl::DesignAst& ast, const ModuleAst& m, const ItemRef& item, RtlChunk& c) {
    switch (item.kind) {
    case ItemRef::Kind::Declaration:
        for (const auto& n : m.declarations[item.index].names) c.declared.insert(n);
        break;
    case ItemRef::Kind::Assign: {
        const auto& a = m.assigns[item.index];
        add_assignment_signals(a.lhs, a.rhs, c);
        break;
    }
    case ItemRef::Kind::Always: {
        const auto& blk = m.always_blocks[item.index];
        hdl::collect_statement_signals(*blk.body, c.used, c.defined);
        for (const auto& e : blk.edges) c.used.insert(e.signal);
        for (const auto& s : blk.sensitivity) c.used.insert(s);
        break;
    }
    case ItemRef::Kind::Instance: {
        const auto& inst = m.instances[item.index];
        const ModuleAst* def = ast.find_module(inst.module_name);
        std::vector<const hdl::Signal*> ports;
        if (def) ports = def->ports();
        for (std::size_t i = 0; i < inst.connections.size(); ++i) {
            const auto& conn = inst.connections[i];
            if (!conn.expr) continue;
            const hdl::Signal* port = nullptr;
            if (def) port = conn.port.empty() ? (i < ports.size() ? ports[i] : nullptr) : def->find_signal(conn.port);
            if (port && port->direction == hdl::PortDirection::Output) {
                add_assignment_signals(conn.expr, nullptr, c);
            } else {
                auto sigs = hdl::collect_signals(*conn.expr);
                c.used.insert(sigs.begin(), sigs.end());
            }
        }
        break;
    }
    case ItemRef::Kind::Skipped:
        break;
    }
}

} // namespace

std::vector<RtlChunk> chunk_design(const hdl::DesignAst& ast) {
    std::vector<RtlChunk> out;
    for (int f = 0; f < static_cast<int>(ast.files.size()); ++f) {
        const auto& file = ast.files[f];
        std::vector<const ModuleAst*> mods;
        for (const auto& m : ast.modules) {
            if (m.file == f) mods.push_back(&m);
        }
        std::sort(mods.begin(), mods.end(),
                  [](const ModuleAst* a, const ModuleAst* b) { return a->span.begin < b->span.begin; });
        std::size_t file_first = out.size();
        int prev_end = 0;
        for (const ModuleAst* m : mods) {
            auto groups = group_items(*m);
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                const Group& g = groups[gi];
                RtlChunk c;
                c.kind = g.kind;
                c.module = m->name;
                c.file = file.path;
                c.start_line = prev_end + 1;
                c.end_line = std::max(g.last_line, c.start_line);
                if (gi + 1 == groups.size()) c.end_line = std::max(c.end_line, m->span.end_line);
                if (g.header) {
                    for (const auto& s : m->signals) {
                        if (s.is_port() && m->header_span.contains(s.span)) c.declared.insert(s.name);
                    }
                }
                for (const ItemRef* item : g.items) add_item_signals(ast, *m, *item, c);
                prev_end = c.end_line;
                out.push_back(std::move(c));
            }
        }
        if (out.size() > file_first) out.back().end_line = std::max(out.back().end_line, file.line_count());
        for (std::size_t i = file_first; i < out.size(); ++i) out[i].text = file.lines(out[i].start_line, out[i].end_line);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
    return out;
}

} // namespace assertfix::retrieval
