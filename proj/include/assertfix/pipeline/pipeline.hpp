#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "assertfix/cdfg/cdfg.hpp"
#include "assertfix/fix/fix.hpp"
#include "assertfix/hdl/design.hpp"
#include "assertfix/hdl/sva.hpp"
#include "assertfix/llm/client.hpp"
#include "assertfix/report/report.hpp"
#include "assertfix/retrieval/retrieval.hpp"

namespace assertfix::pipeline {

namespace fs = std::filesystem;

struct PipelineConfig {
    std::string design = "design";
    fs::path base_dir; // relative paths below resolve against this
    std::vector<std::string> sources; // as written; also the names used in prompts
    std::string top;
    std::string clock; // for assertions without a clocking event
    fs::path assertions;
    fs::path traces;

    std::string backend = "none"; // none | mock | replay | http
    fs::path fixtures;
    fs::path mock_rules;
    bool record = false;
    llm::HttpConfig http;

    int shift_bound = 3;
    int top_k = 10;
    int candidate_cap = static_cast<int>(fix::kCandidateCap);
    int jobs = 0; // 0: hardware concurrency
    std::uint64_t seed = 0;
    fs::path out;

    fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }
    /// Bounds positive, backend known, input paths exist. Throws ConfigError.
    void validate() const;
};

/// INI file with sections [design], [inputs], [llm], [run]. Unknown sections
/// or keys throw ConfigError; a missing file throws IoError.
PipelineConfig load_config(const fs::path& path);

/// `<name>.vcd`, then `<name>.*.vcd` in lexical order.
std::vector<fs::path> find_traces(const fs::path& dir, const std::string& name);

/// Backend for `cfg.backend`; nullptr for "none". With `record`, responses are
/// appended to the fixture file.
std::shared_ptr<llm::LlmClient> make_backend(const PipelineConfig& cfg);

/// Parsed design and the read-only structures shared by workers.
struct DesignContext {
    hdl::DesignAst ast;
    cdfg::DesignCdfg g;
    std::unique_ptr<retrieval::ChunkIndex> index;
};

DesignContext load_design(const PipelineConfig& cfg);

struct AssertionResult {
    report::AssertionRow row;
    std::optional<fix::FixOutcome> outcome;       // failing assertions that reached Stage 3
    std::optional<hdl::SvaAssertion> assertion;   // parsed original
    std::optional<hdl::SvaAssertion> fixed;
};

struct PipelineResult {
    report::FixReport report;
    std::vector<AssertionResult> results; // input order
};

/// Stage 1 -> 2 -> 3 per assertion on a worker pool. Per-assertion failures
/// are recorded in the report; artifacts go under `cfg.out / "artifacts"` when
/// `cfg.out` is set.
PipelineResult run_pipeline(const PipelineConfig& cfg, llm::LlmClient* llm);

/// run_pipeline with the configured backend, then report.json and report.md in `cfg.out`.
PipelineResult run_and_emit(const PipelineConfig& cfg);

struct BenchmarkManifest {
    std::string design;
    int loc = 0;
    std::vector<std::string> sources; // files, or directories scanned for .v/.sv/.vh
    std::map<std::string, int> assertions; // by injected error type
    fs::path base_dir;
};

BenchmarkManifest load_manifest(const fs::path& path);

/// Non-blank lines that are not wholly comment.
int count_loc(const std::string& text);

struct ManifestCheck {
    bool sources_present = false;
    int counted = 0;
    bool within_tolerance = false; // |counted - loc| <= 2% of loc
};

ManifestCheck check_manifest(const BenchmarkManifest& m);

} // namespace assertfix::pipeline
