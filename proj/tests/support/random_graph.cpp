#include "random_graph.hpp"

#include <functional>
#include <set>

namespace assertfix::testsupport {

RandomGraph random_graph(std::mt19937_64& rng, int n, double density, bool allow_seq_back_edges) {
    RandomGraph g;
    g.n = n;
    std::bernoulli_distribution edge(density), seq(0.4);
    std::set<std::tuple<int, int, bool>> seen;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || !edge(rng)) continue;
            bool s = seq(rng);
            if (i > j && !(allow_seq_back_edges && s)) continue;
            if (seen.insert({i, j, s}).second) g.edges.emplace_back(i, j, s);
        }
    }
    return g;
}

std::string to_verilog(const RandomGraph& g) {
    std::string src = "module r(input clk);\n";
    for (int i = 0; i < g.n; ++i) src += "  reg n" + std::to_string(i) + ";\n";
    for (int j = 0; j < g.n; ++j) {
        std::string comb, seq;
        for (const auto& [a, b, s] : g.edges) {
            if (b != j) continue;
            std::string& dst = s ? seq : comb;
            dst += (dst.empty() ? "n" : " ^ n") + std::to_string(a);
        }
        if (!comb.empty()) src += "  always @* n" + std::to_string(j) + " = " + comb + ";\n";
        if (!seq.empty()) src += "  always @(posedge clk) n" + std::to_string(j) + " <= " + seq + ";\n";
    }
    return src + "endmodule\n";
}

std::map<int, std::pair<int, int>> enumerate_paths(const RandomGraph& g, int from) {
    std::map<int, std::pair<int, int>> out;
    std::vector<bool> on(static_cast<std::size_t>(g.n), false);
    std::function<void(int, int)> go = [&](int u, int d) {
        auto it = out.find(u);
        if (it == out.end()) out[u] = {d, d};
        else it->second = {std::min(it->second.first, d), std::max(it->second.second, d)};
        on[static_cast<std::size_t>(u)] = true;
        for (const auto& [a, b, s] : g.edges) {
            if (a == u && !on[static_cast<std::size_t>(b)]) go(b, d + (s ? 1 : 0));
        }
        on[static_cast<std::size_t>(u)] = false;
    };
    go(from, 0);
    return out;
}

} // namespace assertfix::testsupport
