#include "assertfix/cdfg/cdfg.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <sstream>
#include <tuple>

#include "assertfix/error.hpp"

namespace assertfix::cdfg {

using hdl::ExprPtr;
using hdl::Statement;

std::string_view to_string(EdgeKind k) noexcept {
    return k == EdgeKind::Data ? "data" : "control";
}

std::string_view to_string(Timing t) noexcept {
    return t == Timing::Combinational ? "combinational" : "sequential";
}

std::optional<std::size_t> DesignCdfg::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t DesignCdfg::index(const std::string& name) const {
    auto i = find(name);
    if (!i) throw UnknownSignal(name);
    return *i;
}

namespace {

struct GuardTerm {
    ExprPtr pred;
    hdl::SourceSpan span;
};

} // namespace

class CdfgBuilder {
public:
    explicit CdfgBuilder(const hdl::DesignAst& ast) : ast_(ast) {}

    DesignCdfg build(const std::string& top_name) {
        const hdl::ModuleAst* top = top_name.empty() ? &ast_.top_module() : ast_.find_module(top_name);
        if (!top) throw Error("top module '" + top_name + "' not found");
        g_.top_ = top->name;
        flatten(*top, "", 0);
        g_.out_.assign(g_.nodes_.size(), {});
        g_.in_.assign(g_.nodes_.size(), {});
        for (std::size_t i = 0; i < g_.edges_.size(); ++i) {
            g_.out_[g_.edges_[i].src].push_back(i);
            g_.in_[g_.edges_[i].dst].push_back(i);
        }
        check_loops();
        return std::move(g_);
    }

private:
    void flatten(const hdl::ModuleAst& m, const std::string& prefix, int depth) {
        if (depth > 64) throw Error("instance hierarchy too deep (recursive instantiation?)");
        auto q = [&](const std::string& n) { return prefix + n; };
        for (const auto& s : m.signals) {
            std::string name = q(s.name);
            g_.by_name_[name] = g_.nodes_.size();
            g_.nodes_.push_back(Node{name, m.name, s.width()});
        }
        auto rename = [&](const ExprPtr& e) -> ExprPtr {
            if (!e || prefix.empty()) return e;
            return hdl::rename_identifiers(e, q);
        };

        for (const auto& a : m.assigns) {
            add_assignment(rename(a.lhs), rename(a.rhs), {}, Timing::Combinational, a.span, false);
        }
        for (const auto& blk : m.always_blocks) {
            walk(*blk.body, {}, blk.sequential(), rename);
        }
        for (const auto& inst : m.instances) {
            const hdl::ModuleAst* child = ast_.find_module(inst.module_name);
            if (!child) continue;
            std::string child_prefix = prefix + inst.instance_name + ".";
            flatten(*child, child_prefix, depth + 1);
            auto ports = child->ports();
            for (std::size_t i = 0; i < inst.connections.size(); ++i) {
                const auto& c = inst.connections[i];
                if (!c.expr) continue;
                const hdl::Signal* port = nullptr;
                if (c.port.empty()) {
                    if (i < ports.size()) port = ports[i];
                } else {
                    port = child->find_signal(c.port);
                }
                if (!port) continue;
                ExprPtr outer = rename(c.expr);
                ExprPtr inner = hdl::make_identifier(child_prefix + port->name, c.span);
                if (*port->direction == hdl::PortDirection::Output) {
                    add_assignment(outer, inner, {}, Timing::Combinational, c.span, false);
                } else {
                    add_assignment(inner, outer, {}, Timing::Combinational, c.span, false);
                }
            }
        }
    }

    void walk(const Statement& s, std::vector<GuardTerm> guard, bool sequential,
              const std::function<ExprPtr(const ExprPtr&)>& rename) {
        switch (s.kind) {
        case Statement::Kind::Block:
            for (const auto& b : s.body) walk(*b, guard, sequential, rename);
            break;
        case Statement::Kind::If: {
            ExprPtr cond = rename(s.cond);
            auto then_guard = guard;
            for (const auto& c : hdl::conjuncts(cond)) then_guard.push_back({c, s.cond->span});
            walk(*s.then_branch, then_guard, sequential, rename);
            if (s.else_branch) {
                auto else_guard = guard;
                else_guard.push_back({hdl::negate(cond), s.cond->span});
                walk(*s.else_branch, else_guard, sequential, rename);
            }
            break;
        }
        case Statement::Kind::Case: {
            ExprPtr sel = rename(s.cond);
            std::vector<ExprPtr> all_labels;
            for (const auto& item : s.items) {
                for (const auto& l : item.labels) all_labels.push_back(rename(l));
            }
            for (const auto& item : s.items) {
                auto item_guard = guard;
                if (item.labels.empty()) {
                    for (const auto& l : all_labels) {
                        item_guard.push_back({hdl::make_binary(hdl::BinaryOp::Ne, sel, l), item.span});
                    }
                } else {
                    ExprPtr pred;
                    for (const auto& l : item.labels) {
                        ExprPtr eq = hdl::make_binary(hdl::BinaryOp::Eq, sel, rename(l));
                        pred = pred ? hdl::make_binary(hdl::BinaryOp::LogOr, pred, eq) : eq;
                    }
                    item_guard.push_back({pred, item.span});
                }
                walk(*item.body, item_guard, sequential, rename);
            }
            break;
        }
        case Statement::Kind::BlockingAssign:
        case Statement::Kind::NonblockingAssign: {
            Timing t = sequential && s.kind == Statement::Kind::NonblockingAssign ? Timing::Sequential
                                                                                 : Timing::Combinational;
            add_assignment(rename(s.lhs), rename(s.rhs), guard, t, s.span, true);
            break;
        }
        case Statement::Kind::Null:
            break;
        }
    }

    void collect_targets(const ExprPtr& lhs, std::vector<std::string>& out, std::set<std::string>& index_reads) {
        if (lhs->kind == hdl::ExprKind::Concat) {
            for (const auto& p : lhs->operands) collect_targets(p, out, index_reads);
            return;
        }
        if (lhs->kind == hdl::ExprKind::BitSelect) {
            auto s = hdl::collect_signals(*lhs->operands[1]);
            index_reads.insert(s.begin(), s.end());
        }
        if (auto b = hdl::base_signal(*lhs)) out.push_back(*b);
    }

    void add_assignment(const ExprPtr& lhs, const ExprPtr& rhs, const std::vector<GuardTerm>& guard, Timing t,
                        const hdl::SourceSpan& span, bool in_block) {
        std::vector<std::string> targets;
        std::set<std::string> reads;
        collect_targets(lhs, targets, reads);
        auto rhs_sigs = hdl::collect_signals(*rhs);
        reads.insert(rhs_sigs.begin(), rhs_sigs.end());
        std::vector<ExprPtr> preds;
        for (const auto& gt : guard) preds.push_back(gt.pred);
        for (const auto& target : targets) {
            std::size_t dst = node(target);
            ExprPtr target_lhs = targets.size() == 1 ? lhs : hdl::make_identifier(target);
            g_.assignments_.push_back(GuardedAssignment{target, target_lhs, rhs, preds, t, span});
            for (const auto& r : reads) add_edge(node(r), dst, EdgeKind::Data, t, span, in_block);
            for (const auto& gt : guard) {
                for (const auto& r : hdl::collect_signals(*gt.pred)) {
                    add_edge(node(r), dst, EdgeKind::Control, t, gt.span, in_block);
                }
            }
        }
    }

    std::size_t node(const std::string& name) {
        auto it = g_.by_name_.find(name);
        if (it == g_.by_name_.end()) throw UnknownSignal(name);
        return it->second;
    }

    void add_edge(std::size_t src, std::size_t dst, EdgeKind k, Timing t, const hdl::SourceSpan& span, bool in_block) {
        auto key = std::make_tuple(src, dst, static_cast<int>(k), static_cast<int>(t), span.file, span.begin);
        if (!seen_.insert(key).second) return;
        if (src == dst && in_block) exempt_.insert(g_.edges_.size());
        g_.edges_.push_back(Edge{src, dst, k, t, span});
    }

    void check_loops() {
        const std::size_t n = g_.nodes_.size();
        std::vector<int> color(n, 0);
        std::vector<std::size_t> parent(n, std::numeric_limits<std::size_t>::max());
        for (std::size_t root = 0; root < n; ++root) {
            if (color[root]) continue;
            // Iterative DFS: (node, next out-edge position).
            std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
            color[root] = 1;
            while (!stack.empty()) {
                auto& [u, pos] = stack.back();
                const auto& outs = g_.out_[u];
                if (pos == outs.size()) {
                    color[u] = 2;
                    stack.pop_back();
                    continue;
                }
                std::size_t ei = outs[pos++];
                const Edge& e = g_.edges_[ei];
                if (e.timing != Timing::Combinational || exempt_.count(ei)) continue;
                std::size_t v = e.dst;
                if (color[v] == 1) {
                    std::vector<std::string> cycle{g_.nodes_[v].name};
                    for (std::size_t w = u; w != v; w = parent[w]) cycle.push_back(g_.nodes_[w].name);
                    std::reverse(cycle.begin() + 1, cycle.end());
                    cycle.push_back(g_.nodes_[v].name);
                    throw CombinationalLoop(cycle);
                }
                if (color[v] == 0) {
                    color[v] = 1;
                    parent[v] = u;
                    stack.push_back({v, 0});
                }
            }
        }
    }

    const hdl::DesignAst& ast_;
    DesignCdfg g_;
    std::set<std::tuple<std::size_t, std::size_t, int, int, int, std::size_t>> seen_;
    std::set<std::size_t> exempt_;
};

DesignCdfg build_cdfg(const hdl::DesignAst& ast, const std::string& top) {
    return CdfgBuilder(ast).build(top);
}

Cone cone_of_influence(const DesignCdfg& g, const std::set<std::string>& seeds, Direction direction,
                       std::optional<int> max_depth) {
    const int inf = std::numeric_limits<int>::max();
    std::vector<int> dist(g.nodes().size(), inf);
    std::deque<std::size_t> queue;
    for (const auto& s : seeds) {
        std::size_t i = g.index(s);
        dist[i] = 0;
        queue.push_back(i);
    }
    while (!queue.empty()) {
        std::size_t u = queue.front();
        queue.pop_front();
        const auto& adj = direction == Direction::Backward ? g.in_edges(u) : g.out_edges(u);
        for (std::size_t ei : adj) {
            const Edge& e = g.edges()[ei];
            std::size_t v = direction == Direction::Backward ? e.src : e.dst;
            int w = e.timing == Timing::Sequential ? 1 : 0;
            int d = dist[u] + w;
            if (max_depth && d > *max_depth) continue;
            if (d < dist[v]) {
                dist[v] = d;
                if (w == 0) queue.push_front(v);
                else queue.push_back(v);
            }
        }
    }
    Cone out;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] != inf) out[g.nodes()[i].name] = dist[i];
    }
    return out;
}

std::set<std::string> cone_signals(const Cone& cone) {
    std::set<std::string> out;
    for (const auto& [name, depth] : cone) out.insert(name);
    return out;
}

std::vector<GuardedAssignment> guard_conditions(const DesignCdfg& g, const std::string& target) {
    g.index(target);
    std::vector<GuardedAssignment> out;
    for (const auto& a : g.assignments()) {
        if (a.target == target) out.push_back(a);
    }
    return out;
}

std::optional<DepthRange> sequential_depth(const DesignCdfg& g, const std::string& from, const std::string& to,
                                           int cap) {
    std::size_t s = g.index(from);
    std::size_t t = g.index(to);
    if (s == t) return DepthRange{0, 0};
    Cone fwd = cone_of_influence(g, {from}, Direction::Forward);
    auto it = fwd.find(to);
    if (it == fwd.end()) return std::nullopt;
    DepthRange r{it->second, it->second};

    // Only nodes that can still reach `to` are worth extending a path through.
    Cone back = cone_of_influence(g, {to}, Direction::Backward);
    std::vector<bool> useful(g.nodes().size(), false);
    for (const auto& [name, d] : back) useful[*g.find(name)] = true;

    std::vector<bool> on_path(g.nodes().size(), false);
    long budget = 4'000'000;
    std::function<void(std::size_t, int)> dfs = [&](std::size_t u, int depth) {
        if (r.max >= cap || --budget < 0) return;
        if (u == t) {
            r.max = std::max(r.max, std::min(depth, cap));
            return;
        }
        on_path[u] = true;
        for (std::size_t ei : g.out_edges(u)) {
            const Edge& e = g.edges()[ei];
            if (on_path[e.dst] || !useful[e.dst]) continue;
            dfs(e.dst, depth + (e.timing == Timing::Sequential ? 1 : 0));
        }
        on_path[u] = false;
    };
    dfs(s, 0);
    r.min = std::min(r.min, cap);
    return r;
}

std::string to_dot(const DesignCdfg& g) {
    std::ostringstream os;
    os << "digraph cdfg {\n  rankdir=LR;\n";
    for (const auto& n : g.nodes()) {
        os << "  \"" << n.name << "\" [label=\"" << n.name;
        if (n.width > 1) os << "[" << n.width - 1 << ":0]";
        os << "\"];\n";
    }
    for (const auto& e : g.edges()) {
        os << "  \"" << g.nodes()[e.src].name << "\" -> \"" << g.nodes()[e.dst].name << "\" [kind=" << to_string(e.kind)
           << ", timing=" << to_string(e.timing) << ", style=" << (e.kind == EdgeKind::Data ? "solid" : "dashed")
           << ", color=" << (e.timing == Timing::Sequential ? "blue" : "black") << "];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace assertfix::cdfg
