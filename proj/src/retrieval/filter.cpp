#include <cctype>
#include <sstream>

#include "assertfix/error.hpp"
#include "assertfix/retrieval/retrieval.hpp"

namespace assertfix::retrieval {

namespace {

std::string leaf_name(const std::string& s) {
    auto dot = s.rfind('.');
    return dot == std::string::npos ? s : s.substr(dot + 1);
}

const char* kFilterSystem =
    "You are a hardware verification engineer. You read Verilog RTL and SystemVerilog assertions and "
    "decide which code snippets matter for checking an assertion.";

} // namespace

llm::Prompt build_filter_prompt(const std::vector<ScoredChunk>& chunks, const hdl::SvaAssertion& a) {
    std::ostringstream u;
    u << "Assertion:\n" << hdl::render_assertion(a) << "\n\n";
    u << "Candidate code snippets:\n";
    for (const auto& sc : chunks) {
        const RtlChunk& c = *sc.chunk;
        u << "[chunk " << c.id << "] module " << c.module << ", " << c.file << " lines " << c.start_line << "-"
          << c.end_line << "\n"
          << c.numbered_text() << "\n\n";
    }
    u << "Think step by step. First drop snippets whose signals cannot influence the consequent or be "
         "influenced by the antecedent. Then check the remaining snippets for logical consistency with the "
         "assertion and drop those that are unrelated.\n"
         "Finish with one <keep>ID</keep> tag per snippet to keep, using the chunk ids above.";
    return llm::Prompt{kFilterSystem, u.str()};
}

std::vector<RtlChunk> coi_filter(const std::vector<ScoredChunk>& chunks, const hdl::SvaAssertion& a,
                                 const cdfg::DesignCdfg& g) {
    auto resolvable = [&](const std::set<std::string>& in) {
        std::set<std::string> out;
        for (const auto& s : in) {
            if (g.has(s)) out.insert(s);
        }
        return out;
    };
    auto back = cdfg::cone_of_influence(g, resolvable(a.consequent_signals()), cdfg::Direction::Backward);
    auto fwd = cdfg::cone_of_influence(g, resolvable(a.antecedent_signals()), cdfg::Direction::Forward);
    std::set<std::pair<std::string, std::string>> reach; // (module, local name)
    for (const auto* cone : {&back, &fwd}) {
        for (const auto& [name, d] : *cone) {
            auto idx = g.find(name);
            if (idx) reach.emplace(g.nodes()[*idx].module, leaf_name(name));
        }
    }
    std::vector<RtlChunk> out;
    for (const auto& sc : chunks) {
        const RtlChunk& c = *sc.chunk;
        bool hit = false;
        for (const auto* set : {&c.defined, &c.used, &c.declared}) {
            for (const auto& s : *set) {
                if (reach.count({c.module, s})) {
                    hit = true;
                    break;
                }
            }
            if (hit) break;
        }
        if (hit) out.push_back(c);
    }
    return out;
}

std::vector<RtlChunk> fine_filter(const std::vector<ScoredChunk>& chunks, const hdl::SvaAssertion& a,
                                  const cdfg::DesignCdfg& g, llm::LlmClient* llm, std::vector<std::string>* warnings) {
    if (!llm) return coi_filter(chunks, a, g);
    auto resp = llm->complete(build_filter_prompt(chunks, a));
    auto tags = llm::extract_tags(resp.text, "keep");
    if (tags.empty()) throw LlmBackendError("filter response has no <keep> tags");
    std::set<int> keep;
    for (const auto& t : tags) {
        std::string digits;
        for (char ch : t + " ") {
            if (std::isdigit(static_cast<unsigned char>(ch))) {
                digits.push_back(ch);
            } else if (!digits.empty()) {
                keep.insert(std::stoi(digits));
                digits.clear();
            }
        }
    }
    std::set<int> present;
    for (const auto& sc : chunks) present.insert(sc.chunk->id);
    for (int id : keep) {
        if (!present.count(id) && warnings) warnings->push_back("filter kept unknown chunk id " + std::to_string(id));
    }
    std::vector<RtlChunk> out;
    for (const auto& sc : chunks) {
        if (keep.count(sc.chunk->id)) out.push_back(*sc.chunk);
    }
    return out;
}

} // namespace assertfix::retrieval
