#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "assertfix/cdfg/cdfg.hpp"
#include "assertfix/fix/fix.hpp"
#include "assertfix/hdl/sva.hpp"

namespace assertfix::report {

/// FR in tenths of a percent, rounded half-up; nullopt when nothing was attempted.
std::optional<int> fr_tenths(int fixed, int attempted);

/// "83.8%" or "N/A".
std::string format_percent(std::optional<int> tenths);

struct DesignMetrics {
    std::string design;
    int te_attempted = 0;
    int te_fixed = 0;
    int le_attempted = 0;
    int le_fixed = 0;
    std::optional<int> fr; // tenths
    std::optional<double> coi_before;
    std::optional<double> coi_after;
};

DesignMetrics metrics_from_counts(std::string design, int te_attempted, int te_fixed, int le_attempted, int le_fixed);

/// Counts failing assertions by their classification; `fixed` means an accepted candidate.
DesignMetrics fr_metrics(std::string design, const std::vector<fix::FixOutcome>& outcomes);

/// 100 * |union of backward cones of every assertion's signals| / |nodes|.
/// Assertions with a signal missing from `g` are skipped and reported in `warnings`.
double coi_coverage(const cdfg::DesignCdfg& g, const std::vector<hdl::SvaAssertion>& assertions,
                    std::vector<std::string>* warnings = nullptr);

enum class AssertionStatus { Passing, Fixed, Unfixed, Error };
std::string_view to_string(AssertionStatus s) noexcept;

struct AssertionRow {
    std::string design;
    std::string name;
    AssertionStatus status = AssertionStatus::Unfixed;
    std::optional<std::string> kind;   // Timing / Logic
    std::optional<std::string> source; // classification source
    std::optional<int> shift;
    std::optional<std::string> origin; // accepted candidate origin
    std::string original;
    std::optional<std::string> fixed;
    int candidates_tried = 0;
    std::optional<std::string> error;
    std::vector<std::string> notes;
};

struct RunConfig {
    std::string backend = "none";
    int shift_bound = 3;
    int top_k = 10;
    int candidate_cap = static_cast<int>(fix::kCandidateCap);
    std::uint64_t seed = 0;
};

struct FixReport {
    RunConfig config;
    std::vector<DesignMetrics> designs;
    std::vector<AssertionRow> assertions;
    std::vector<std::string> warnings;
};

enum class Format { Json, Markdown };

nlohmann::json to_json(const FixReport& r);
/// Inverse of to_json; throws ConfigError on a document that does not match the schema.
FixReport from_json(const nlohmann::json& j);

std::string emit_report(const FixReport& r, Format format);
/// Throws IoError.
void write_report(const FixReport& r, Format format, const std::filesystem::path& path);

constexpr int kSchemaVersion = 1;
constexpr const char* kCoiLabel = "COI(analog)";
constexpr const char* kProofCoreNote = "requires formal engine";
constexpr const char* kValidation = "trace-validated";

} // namespace assertfix::report
