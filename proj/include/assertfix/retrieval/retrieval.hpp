#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "assertfix/cdfg/cdfg.hpp"
#include "assertfix/hdl/design.hpp"
#include "assertfix/hdl/sva.hpp"
#include "assertfix/llm/client.hpp"

namespace assertfix::retrieval {

enum class ChunkKind { Declarations, Assigns, Always, Instance, Skipped };

std::string_view to_string(ChunkKind k) noexcept;

struct RtlChunk {
    int id = 0;
    ChunkKind kind = ChunkKind::Declarations;
    std::string module;
    std::string file;
    int start_line = 0; // inclusive, 1-based
    int end_line = 0;
    std::string text;
    std::set<std::string> defined;
    std::set<std::string> used;
    std::set<std::string> declared;

    bool is_logic() const noexcept { return kind == ChunkKind::Assigns || kind == ChunkKind::Always || kind == ChunkKind::Instance; }
    bool mentions(const std::string& signal) const {
        return defined.count(signal) || used.count(signal) || declared.count(signal);
    }
    /// Text with each line prefixed by its source line number.
    std::string numbered_text() const;
};

/// Split every module into chunks: one per always block, instance, or skipped
/// construct, one per run of continuous assigns, and one per run of
/// declarations (the module header joins the first). Every line of every
/// source file belongs to exactly one chunk.
std::vector<RtlChunk> chunk_design(const hdl::DesignAst& ast);

/// Lowercased identifier tokens, plus the `_`-separated parts of compound names.
std::vector<std::string> tokenize(const std::string& text);

/// `name` with a trailing `_i`, `_o`, `_io`, `_r`, `_q`, `_reg` or `_next` removed.
std::string strip_signal_suffix(const std::string& name);

struct ScoredChunk {
    const RtlChunk* chunk = nullptr;
    double score = 0;
};

/// Immutable BM25 index plus a signal-name index over a chunk list.
class ChunkIndex {
public:
    explicit ChunkIndex(std::vector<RtlChunk> chunks, double k1 = 1.2, double b = 0.75);

    const std::vector<RtlChunk>& chunks() const noexcept { return chunks_; }
    const RtlChunk* find(int id) const;

    /// BM25 of the chunk at position `pos` for the query tokens.
    double bm25(std::size_t pos, const std::vector<std::string>& query) const;
    /// Positions of chunks that define / use / declare `name` exactly.
    const std::vector<std::size_t>& definers(const std::string& name) const;
    const std::vector<std::size_t>& users(const std::string& name) const;
    const std::vector<std::size_t>& declarers(const std::string& name) const;
    /// Positions of chunks mentioning a signal whose stripped name equals strip_signal_suffix(name).
    const std::vector<std::size_t>& suffix_matches(const std::string& name) const;
    bool knows(const std::string& name) const;

private:
    std::vector<RtlChunk> chunks_;
    double k1_, b_, avg_len_ = 0;
    std::vector<std::map<std::string, int>> tf_;
    std::vector<int> len_;
    std::map<std::string, int> df_;
    std::map<std::string, std::vector<std::size_t>> def_, use_, decl_, stripped_;
};

/// Query text for one signal.
std::string retrieval_query(const std::string& signal);

/// Top-k chunks for `signal`. Score = tier + bm25/(1+bm25) with tier 4 for
/// definers, 3 for users, 2 for declarers, 1 for suffix matches, 0 otherwise;
/// ties keep source order. An unknown signal yields an empty list and a warning.
std::vector<ScoredChunk> coarse_retrieve(const ChunkIndex& index, const std::string& signal, int k,
                                         std::vector<std::string>* warnings = nullptr);

/// One query per consequent signal, merged by max score, top-k.
std::vector<ScoredChunk> retrieve_for_assertion(const ChunkIndex& index, const hdl::SvaAssertion& a, int k,
                                                std::vector<std::string>* warnings = nullptr);

llm::Prompt build_filter_prompt(const std::vector<ScoredChunk>& chunks, const hdl::SvaAssertion& a);

/// Order-preserving subset of `chunks`. Without a client, keeps chunks that
/// touch the backward cone of the consequent signals or the forward cone of
/// the antecedent signals. With a client, keeps the `<keep>` ids of the reply;
/// unknown ids are dropped with a warning. Throws LlmBackendError.
std::vector<RtlChunk> fine_filter(const std::vector<ScoredChunk>& chunks, const hdl::SvaAssertion& a,
                                  const cdfg::DesignCdfg& g, llm::LlmClient* llm = nullptr,
                                  std::vector<std::string>* warnings = nullptr);

/// Deterministic COI filter used by fine_filter when no client is given.
std::vector<RtlChunk> coi_filter(const std::vector<ScoredChunk>& chunks, const hdl::SvaAssertion& a,
                                 const cdfg::DesignCdfg& g);

/// JSON array of {id, module, file, start_line, end_line, defined, used}.
std::string dump_chunks_json(const std::vector<RtlChunk>& chunks);

} // namespace assertfix::retrieval
