#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "assertfix/error.hpp"
#include "assertfix/retrieval/retrieval.hpp"

namespace assertfix::retrieval {

namespace {

const std::set<std::string> kStopwords = {"what", "are", "the", "code", "snippets", "related", "to"};

std::string leaf_name(const std::string& s) {
    auto dot = s.rfind('.');
    return dot == std::string::npos ? s : s.substr(dot + 1);
}

const std::vector<std::size_t>& lookup(const std::map<std::string, std::vector<std::size_t>>& m,
                                       const std::string& key) {
    static const std::vector<std::size_t> empty;
    auto it = m.find(key);
    return it == m.end() ? empty : it->second;
}

} // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = text[i];
        if (!(std::isalpha(c) || c == '_')) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '$')) ++j;
        std::string word = text.substr(i, j - i);
        for (auto& ch : word) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        out.push_back(word);
        if (word.find('_') != std::string::npos) {
            std::stringstream ss(word);
            std::string part;
            while (std::getline(ss, part, '_')) {
                if (!part.empty() && part != word) out.push_back(part);
            }
        }
        i = j;
    }
    return out;
}

std::string strip_signal_suffix(const std::string& name) {
    static const char* suffixes[] = {"_next", "_reg", "_io", "_i", "_o", "_r", "_q"};
    for (const char* s : suffixes) {
        std::string suf(s);
        if (name.size() > suf.size() && name.compare(name.size() - suf.size(), suf.size(), suf) == 0) {
            return name.substr(0, name.size() - suf.size());
        }
    }
    return name;
}

ChunkIndex::ChunkIndex(std::vector<RtlChunk> chunks, double k1, double b)
    : chunks_(std::move(chunks)), k1_(k1), b_(b) {
    long total = 0;
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        const auto& c = chunks_[i];
        std::map<std::string, int> tf;
        auto toks = tokenize(c.text);
        for (const auto& t : toks) ++tf[t];
        for (const auto& [t, n] : tf) ++df_[t];
        len_.push_back(static_cast<int>(toks.size()));
        total += static_cast<long>(toks.size());
        tf_.push_back(std::move(tf));
        for (const auto& s : c.defined) def_[s].push_back(i);
        for (const auto& s : c.used) use_[s].push_back(i);
        for (const auto& s : c.declared) decl_[s].push_back(i);
        std::set<std::string> stripped;
        for (const auto* set : {&c.defined, &c.used, &c.declared}) {
            for (const auto& s : *set) stripped.insert(strip_signal_suffix(s));
        }
        for (const auto& s : stripped) stripped_[s].push_back(i);
    }
    avg_len_ = chunks_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(chunks_.size());
}

const RtlChunk* ChunkIndex::find(int id) const {
    for (const auto& c : chunks_) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

double ChunkIndex::bm25(std::size_t pos, const std::vector<std::string>& query) const {
    double n = static_cast<double>(chunks_.size());
    double score = 0;
    const auto& tf = tf_[pos];
    double norm = avg_len_ > 0 ? static_cast<double>(len_[pos]) / avg_len_ : 1.0;
    for (const auto& q : query) {
        auto it = tf.find(q);
        if (it == tf.end()) continue;
        double df = df_.at(q);
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        double f = it->second;
        score += idf * f * (k1_ + 1) / (f + k1_ * (1 - b_ + b_ * norm));
    }
    return score;
}

const std::vector<std::size_t>& ChunkIndex::definers(const std::string& name) const { return lookup(def_, name); }
const std::vector<std::size_t>& ChunkIndex::users(const std::string& name) const { return lookup(use_, name); }
const std::vector<std::size_t>& ChunkIndex::declarers(const std::string& name) const { return lookup(decl_, name); }
const std::vector<std::size_t>& ChunkIndex::suffix_matches(const std::string& name) const {
    return lookup(stripped_, strip_signal_suffix(name));
}

bool ChunkIndex::knows(const std::string& name) const {
    return def_.count(name) || use_.count(name) || decl_.count(name);
}

std::string retrieval_query(const std::string& signal) {
    return "What are the code snippets related to " + signal + "?";
}

std::vector<ScoredChunk> coarse_retrieve(const ChunkIndex& index, const std::string& signal, int k,
                                         std::vector<std::string>* warnings) {
    if (k < 1) throw ConfigError("retrieval depth k must be >= 1");
    std::string name = leaf_name(signal);
    if (!index.knows(name)) {
        if (warnings) warnings->push_back("signal '" + signal + "' appears in no chunk; nothing retrieved");
        return {};
    }
    std::vector<std::string> query;
    for (auto& t : tokenize(retrieval_query(name))) {
        if (!kStopwords.count(t)) query.push_back(std::move(t));
    }
    std::vector<int> tier(index.chunks().size(), 0);
    auto raise = [&](const std::vector<std::size_t>& positions, int t) {
        for (auto p : positions) tier[p] = std::max(tier[p], t);
    };
    raise(index.definers(name), 4);
    raise(index.users(name), 3);
    raise(index.declarers(name), 2);
    raise(index.suffix_matches(name), 1);

    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < index.chunks().size(); ++i) {
        double s = index.bm25(i, query);
        if (tier[i] == 0 && s <= 0) continue;
        ranked.emplace_back(tier[i] + s / (1.0 + s), i);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<ScoredChunk> out;
    for (const auto& [s, i] : ranked) {
        if (static_cast<int>(out.size()) == k) break;
        out.push_back(ScoredChunk{&index.chunks()[i], s});
    }
    return out;
}

std::vector<ScoredChunk> retrieve_for_assertion(const ChunkIndex& index, const hdl::SvaAssertion& a, int k,
                                                std::vector<std::string>* warnings) {
    auto signals = a.consequent_signals();
    if (signals.empty()) signals = a.signals();
    std::map<const RtlChunk*, double> best;
    for (const auto& s : signals) {
        for (const auto& sc : coarse_retrieve(index, s, k, warnings)) {
            auto [it, fresh] = best.emplace(sc.chunk, sc.score);
            if (!fresh) it->second = std::max(it->second, sc.score);
        }
    }
    std::vector<ScoredChunk> out;
    for (const auto& [c, s] : best) out.push_back(ScoredChunk{c, s});
    std::sort(out.begin(), out.end(), [](const ScoredChunk& x, const ScoredChunk& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.chunk->id < y.chunk->id;
    });
    if (static_cast<int>(out.size()) > k) out.resize(static_cast<std::size_t>(k));
    return out;
}

std::string dump_chunks_json(const std::vector<RtlChunk>& chunks) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : chunks) {
        arr.push_back({{"id", c.id},
                       {"module", c.module},
                       {"file", c.file},
                       {"start_line", c.start_line},
                       {"end_line", c.end_line},
                       {"defined", c.defined},
                       {"used", c.used}});
    }
    return arr.dump(2) + "\n";
}

} // namespace assertfix::retrieval
