#include "assertfix/report/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "assertfix/error.hpp"

namespace assertfix::report {

using nlohmann::json;

std::optional<int> fr_tenths(int fixed, int attempted) {
    if (attempted <= 0) return std::nullopt;
    // exact integer half-up: round(1000 * fixed / attempted)
    long long num = 2LL * fixed * 1000 + attempted;
    return static_cast<int>(num / (2LL * attempted));
}

std::string format_percent(std::optional<int> tenths) {
    if (!tenths) return "N/A";
    std::ostringstream os;
    os << *tenths / 10 << '.' << *tenths % 10 << '%';
    return os.str();
}

DesignMetrics metrics_from_counts(std::string design, int te_attempted, int te_fixed, int le_attempted, int le_fixed) {
    DesignMetrics m;
    m.design = std::move(design);
    m.te_attempted = te_attempted;
    m.te_fixed = te_fixed;
    m.le_attempted = le_attempted;
    m.le_fixed = le_fixed;
    m.fr = fr_tenths(te_fixed + le_fixed, te_attempted + le_attempted);
    return m;
}

DesignMetrics fr_metrics(std::string design, const std::vector<fix::FixOutcome>& outcomes) {
    int te = 0, tef = 0, le = 0, lef = 0;
    for (const auto& o : outcomes) {
        bool ok = o.status == fix::FixStatus::Fixed;
        if (o.classification.kind == classify::ErrorKind::Timing) {
            ++te;
            tef += ok;
        } else {
            ++le;
            lef += ok;
        }
    }
    return metrics_from_counts(std::move(design), te, tef, le, lef);
}

double coi_coverage(const cdfg::DesignCdfg& g, const std::vector<hdl::SvaAssertion>& assertions,
                    std::vector<std::string>* warnings) {
    if (g.nodes().empty()) return 0.0;
    std::set<std::string> covered;
    for (const auto& a : assertions) {
        auto sigs = a.signals();
        std::string missing;
        for (const auto& s : sigs) {
            if (!g.has(s)) {
                missing = s;
                break;
            }
        }
        if (!missing.empty()) {
            if (warnings) warnings->push_back("coverage: skipped " + a.name.value_or("<unnamed>") + ", unknown signal " + missing);
            continue;
        }
        for (const auto& s : cdfg::cone_signals(cdfg::cone_of_influence(g, sigs, cdfg::Direction::Backward))) covered.insert(s);
    }
    return 100.0 * static_cast<double>(covered.size()) / static_cast<double>(g.nodes().size());
}

std::string_view to_string(AssertionStatus s) noexcept {
    switch (s) {
    case AssertionStatus::Passing: return "passing";
    case AssertionStatus::Fixed: return "fixed";
    case AssertionStatus::Unfixed: return "unfixed";
    case AssertionStatus::Error: return "error";
    }
    return "?";
}

namespace {

double round2(double x) { return std::round(x * 100.0) / 100.0; }

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json fr_json(std::optional<int> tenths) { return tenths ? json(*tenths / 10.0) : json(nullptr); }

json cov_json(std::optional<double> v) { return v ? json(round2(*v)) : json(nullptr); }

AssertionStatus status_from(const std::string& s) {
    for (auto st : {AssertionStatus::Passing, AssertionStatus::Fixed, AssertionStatus::Unfixed, AssertionStatus::Error}) {
        if (to_string(st) == s) return st;
    }
    throw ConfigError("report: unknown status " + s);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<T>();
}

} // namespace

json to_json(const FixReport& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = {{"backend", r.config.backend},
                   {"shift_bound", r.config.shift_bound},
                   {"top_k", r.config.top_k},
                   {"candidate_cap", r.config.candidate_cap},
                   {"seed", r.config.seed}};
    j["metrics"] = {{"coverage", kCoiLabel}, {"proof_core", kProofCoreNote}, {"validation", kValidation}};
    j["designs"] = json::array();
    for (const auto& d : r.designs) {
        j["designs"].push_back({{"design", d.design},
                                {"te", {{"attempted", d.te_attempted}, {"fixed", d.te_fixed}}},
                                {"le", {{"attempted", d.le_attempted}, {"fixed", d.le_fixed}}},
                                {"fr", fr_json(d.fr)},
                                {"coi_before", cov_json(d.coi_before)},
                                {"coi_after", cov_json(d.coi_after)},
                                {"pc_before", kProofCoreNote},
                                {"pc_after", kProofCoreNote}});
    }
    j["assertions"] = json::array();
    for (const auto& a : r.assertions) {
        j["assertions"].push_back({{"design", a.design},
                                   {"name", a.name},
                                   {"status", std::string(to_string(a.status))},
                                   {"kind", opt(a.kind)},
                                   {"source", opt(a.source)},
                                   {"shift", opt(a.shift)},
                                   {"origin", opt(a.origin)},
                                   {"original", a.original},
                                   {"fixed", opt(a.fixed)},
                                   {"candidates_tried", a.candidates_tried},
                                   {"error", opt(a.error)},
                                   {"notes", a.notes}});
    }
    j["warnings"] = r.warnings;
    return j;
}

FixReport from_json(const json& j) {
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) throw ConfigError("report: unsupported schema version");
        FixReport r;
        const auto& c = j.at("config");
        r.config.backend = c.at("backend").get<std::string>();
        r.config.shift_bound = c.at("shift_bound").get<int>();
        r.config.top_k = c.at("top_k").get<int>();
        r.config.candidate_cap = c.at("candidate_cap").get<int>();
        r.config.seed = c.at("seed").get<std::uint64_t>();
        for (const auto& d : j.at("designs")) {
            auto m = metrics_from_counts(d.at("design").get<std::string>(), d.at("te").at("attempted").get<int>(),
                                         d.at("te").at("fixed").get<int>(), d.at("le").at("attempted").get<int>(),
                                         d.at("le").at("fixed").get<int>());
            m.coi_before = get_opt<double>(d, "coi_before");
            m.coi_after = get_opt<double>(d, "coi_after");
            r.designs.push_back(std::move(m));
        }
        for (const auto& a : j.at("assertions")) {
            AssertionRow row;
            row.design = a.at("design").get<std::string>();
            row.name = a.at("name").get<std::string>();
            row.status = status_from(a.at("status").get<std::string>());
            row.kind = get_opt<std::string>(a, "kind");
            row.source = get_opt<std::string>(a, "source");
            row.shift = get_opt<int>(a, "shift");
            row.origin = get_opt<std::string>(a, "origin");
            row.original = a.at("original").get<std::string>();
            row.fixed = get_opt<std::string>(a, "fixed");
            row.candidates_tried = a.at("candidates_tried").get<int>();
            row.error = get_opt<std::string>(a, "error");
            row.notes = a.at("notes").get<std::vector<std::string>>();
            r.assertions.push_back(std::move(row));
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report: ") + e.what());
    }
}

namespace {

std::string md_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '|') out += '\\';
        out += ch;
    }
    return out;
}

std::string cov_cell(std::optional<double> v) {
    if (!v) return "N/A";
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << round2(*v) << '%';
    return os.str();
}

std::string markdown(const FixReport& r) {
    std::ostringstream md;
    md << "# Assertion fix report\n\n";
    md << "Backend `" << r.config.backend << "`, shift bound " << r.config.shift_bound << ", top-k " << r.config.top_k
       << ", candidate cap " << r.config.candidate_cap << ", seed " << r.config.seed << ". Fixes are " << kValidation
       << ".\n\n";

    md << "## Fix rate\n\n| Metric |";
    for (const auto& d : r.designs) md << ' ' << md_escape(d.design) << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < r.designs.size(); ++i) md << "---|";
    md << "\n| TE |";
    for (const auto& d : r.designs) md << ' ' << d.te_attempted << '/' << d.te_fixed << " |";
    md << "\n| LE |";
    for (const auto& d : r.designs) md << ' ' << d.le_attempted << '/' << d.le_fixed << " |";
    md << "\n| FR |";
    for (const auto& d : r.designs) md << ' ' << format_percent(d.fr) << " |";
    md << "\n\n";

    md << "## Coverage\n\n| Design | " << kCoiLabel << " before | " << kCoiLabel
       << " after | PC before | PC after |\n|---|---|---|---|---|\n";
    for (const auto& d : r.designs) {
        md << "| " << md_escape(d.design) << " | " << cov_cell(d.coi_before) << " | " << cov_cell(d.coi_after) << " | "
           << kProofCoreNote << " | " << kProofCoreNote << " |\n";
    }
    md << '\n';

    md << "## Assertions\n\n| Design | Assertion | Status | Kind | Origin | Fixed assertion |\n|---|---|---|---|---|---|\n";
    for (const auto& a : r.assertions) {
        md << "| " << md_escape(a.design) << " | " << md_escape(a.name) << " | " << to_string(a.status) << " | "
           << a.kind.value_or("-") << " | " << a.origin.value_or("-") << " | ";
        if (a.fixed) {
            md << '`' << md_escape(*a.fixed) << '`';
        } else if (a.error) {
            md << md_escape(*a.error);
        } else {
            md << '-';
        }
        md << " |\n";
    }
    if (!r.warnings.empty()) {
        md << "\n## Warnings\n\n";
        for (const auto& w : r.warnings) md << "- " << w << '\n';
    }
    return md.str();
}

} // namespace

std::string emit_report(const FixReport& r, Format format) {
    if (format == Format::Markdown) return markdown(r);
    return to_json(r).dump(2) + "\n";
}

void write_report(const FixReport& r, Format format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << emit_report(r, format);
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace assertfix::report
