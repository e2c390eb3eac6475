#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "assertfix/classify/classify.hpp"
#include "assertfix/error.hpp"
#include "assertfix/pipeline/pipeline.hpp"
#include "assertfix/report/report.hpp"
#include "assertfix/trace/trace.hpp"

using namespace assertfix;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitIo = 74;
constexpr int kExitConfig = 78;

struct Overrides {
    std::string config;
    std::string backend;
    std::string fixtures;
    std::string mock_rules;
    std::optional<int> shift_bound;
    std::optional<int> top_k;
    std::string out;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    bool record = false;

    void add_to(CLI::App* app, bool with_out) {
        app->add_option("--config", config, "pipeline config (INI)")->required()->check(CLI::ExistingFile);
        app->add_option("--backend", backend, "LLM backend")->check(CLI::IsMember({"none", "http", "replay", "mock"}));
        app->add_option("--fixtures", fixtures, "fixture JSONL for replay/record");
        app->add_option("--mock-rules", mock_rules, "JSON rules for the mock backend");
        app->add_option("--shift-bound", shift_bound, "K, largest delay shift tried")->check(CLI::PositiveNumber);
        app->add_option("--top-k", top_k, "k, chunks kept by coarse retrieval")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "random seed echoed in the report");
        app->add_flag("--record", record, "append backend responses to the fixture file");
        if (with_out) {
            app->add_option("--out", out, "output directory");
            app->add_option("--jobs", jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
        }
    }

    pipeline::PipelineConfig load() const {
        auto cfg = pipeline::load_config(config);
        auto here = [](const std::string& p) { return fs::absolute(p); };
        if (!backend.empty()) cfg.backend = backend;
        if (!fixtures.empty()) cfg.fixtures = here(fixtures);
        if (!mock_rules.empty()) cfg.mock_rules = here(mock_rules);
        if (shift_bound) cfg.shift_bound = *shift_bound;
        if (top_k) cfg.top_k = *top_k;
        if (!out.empty()) cfg.out = here(out);
        if (jobs) cfg.jobs = *jobs;
        if (seed) cfg.seed = *seed;
        if (record) cfg.record = true;
        cfg.validate();
        return cfg;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write " + path);
}

const hdl::NamedAssertion& find_named(const std::vector<hdl::NamedAssertion>& list, const std::string& name) {
    for (const auto& n : list) {
        if (n.name == name) return n;
    }
    throw ConfigError("no assertion named '" + name + "'");
}

std::vector<trace::CounterexampleTrace> load_traces(const pipeline::PipelineConfig& cfg, const hdl::NamedAssertion& n) {
    std::string clock = n.assertion.clock ? n.assertion.clock->signal : cfg.clock;
    std::vector<trace::CounterexampleTrace> out;
    for (const auto& p : pipeline::find_traces(cfg.resolve(cfg.traces), n.name)) out.push_back(trace::parse_vcd_file(p.string(), clock));
    return out;
}

int cmd_parse(const std::vector<std::string>& files, const std::string& assertions) {
    if (!assertions.empty()) {
        for (const auto& n : hdl::load_assertions(assertions)) std::cout << n.name << ": " << hdl::render_assertion(n.assertion) << "\n";
    }
    if (files.empty()) return 0;
    auto ast = hdl::parse_design_files(files);
    for (const auto& m : ast.modules) {
        std::cout << "module " << m.name << ": " << m.ports().size() << " ports, " << m.signals.size() << " signals, "
                  << m.assigns.size() << " assigns, " << m.always_blocks.size() << " always, " << m.instances.size()
                  << " instances\n";
    }
    for (const auto& d : ast.diagnostics) {
        std::cout << "diagnostic: " << d.construct << " at " << ast.files[static_cast<std::size_t>(d.span.file)].path << ":"
                  << d.span.begin_line << "\n";
    }
    std::cout << "top: " << ast.top_module().name << "\n";
    return 0;
}

int cmd_cdfg(const std::vector<std::string>& files, const std::string& top, bool dot, const std::string& out) {
    auto g = cdfg::build_cdfg(hdl::parse_design_files(files), top);
    if (dot) {
        write_or_print(out, cdfg::to_dot(g));
        return 0;
    }
    std::ostringstream os;
    os << "top " << g.top() << ": " << g.nodes().size() << " nodes, " << g.edges().size() << " edges, "
       << g.assignments().size() << " guarded assignments\n";
    write_or_print(out, os.str());
    return 0;
}

int cmd_retrieve(const Overrides& o, const std::string& name, const std::string& signal) {
    auto cfg = o.load();
    auto ctx = pipeline::load_design(cfg);
    std::vector<std::string> warnings;
    std::vector<retrieval::ScoredChunk> scored;
    json doc;
    if (!signal.empty()) {
        scored = retrieval::coarse_retrieve(*ctx.index, signal, cfg.top_k, &warnings);
    } else {
        auto list = hdl::load_assertions(cfg.resolve(cfg.assertions).string());
        const auto& n = find_named(list, name);
        scored = retrieval::retrieve_for_assertion(*ctx.index, n.assertion, cfg.top_k, &warnings);
        auto client = pipeline::make_backend(cfg);
        auto kept = retrieval::fine_filter(scored, n.assertion, ctx.g, client.get(), &warnings);
        doc["kept"] = json::parse(retrieval::dump_chunks_json(kept));
    }
    doc["retrieved"] = json::array();
    for (const auto& s : scored) doc["retrieved"].push_back({{"id", s.chunk->id}, {"score", s.score}, {"lines", std::to_string(s.chunk->start_line) + "-" + std::to_string(s.chunk->end_line)}, {"file", s.chunk->file}});
    doc["warnings"] = warnings;
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_classify(const Overrides& o, const std::vector<std::string>& names) {
    auto cfg = o.load();
    auto ctx = pipeline::load_design(cfg);
    auto client = pipeline::make_backend(cfg);
    auto list = hdl::load_assertions(cfg.resolve(cfg.assertions).string());
    json out = json::array();
    for (const auto& n : list) {
        if (!names.empty() && std::find(names.begin(), names.end(), n.name) == names.end()) continue;
        json row{{"name", n.name}};
        try {
            auto traces = load_traces(cfg, n);
            auto scored = retrieval::retrieve_for_assertion(*ctx.index, n.assertion, cfg.top_k);
            auto kept = retrieval::fine_filter(scored, n.assertion, ctx.g, client.get());
            auto c = classify::classify_error(n.assertion, traces, kept, ctx.g, client.get(), cfg.shift_bound);
            row["kind"] = std::string(classify::to_string(c.kind));
            row["source"] = std::string(classify::to_string(c.source));
            row["shift"] = c.shift ? json(*c.shift) : json(nullptr);
            row["rationale"] = c.rationale;
        } catch (const NoFailure&) {
            row["kind"] = nullptr;
            row["rationale"] = "passes on every trace";
        } catch (const Error& e) {
            row["error"] = e.what();
        }
        out.push_back(row);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_check(const std::string& text, const std::string& vcd, const std::string& clock_opt) {
    auto a = hdl::parse_assertion(text);
    std::string clock = a.clock ? a.clock->signal : clock_opt;
    if (clock.empty()) throw ConfigError("assertion has no clocking event; pass --clock");
    auto t = trace::parse_vcd_file(vcd, clock);
    auto r = trace::evaluate_assertion(a, t);
    int fails = 0, passes = 0;
    for (const auto& at : r.attempts) {
        fails += at.verdict == trace::Verdict::Fail;
        passes += at.verdict == trace::Verdict::Pass;
    }
    if (!r.passed()) {
        std::cout << "fail: first failing attempt at cycle " << *r.first_failure << " (" << fails << " failing, " << passes
                  << " passing attempts)\n";
        return 1;
    }
    if (!r.covered) {
        std::cout << "vacuous: antecedent never matched in " << t.length() << " cycles\n";
        return 2;
    }
    std::cout << "pass: " << passes << " non-vacuous attempts\n";
    return 0;
}

int cmd_fix(const Overrides& o) {
    auto cfg = o.load();
    auto res = pipeline::run_and_emit(cfg);
    for (const auto& row : res.report.assertions) {
        std::cout << row.name << ": " << report::to_string(row.status);
        if (row.kind) std::cout << " (" << *row.kind << ")";
        if (row.fixed) std::cout << " -> " << *row.fixed;
        if (row.error) std::cout << " [" << *row.error << "]";
        std::cout << "\n";
    }
    for (const auto& d : res.report.designs) {
        std::cout << d.design << ": TE " << d.te_attempted << "/" << d.te_fixed << ", LE " << d.le_attempted << "/"
                  << d.le_fixed << ", FR " << report::format_percent(d.fr) << "\n";
    }
    if (!cfg.out.empty()) std::cout << "report written to " << cfg.resolve(cfg.out).string() << "\n";
    return 0;
}

int cmd_report(const std::string& path, const std::string& format, const std::string& out) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("report is not JSON: ") + e.what());
    }
    auto r = report::from_json(j);
    write_or_print(out, report::emit_report(r, format == "markdown" ? report::Format::Markdown : report::Format::Json));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repair failing SystemVerilog assertions against golden RTL"};
    app.require_subcommand(1);

    std::vector<std::string> files;
    std::string assertions_path, top, out, text, vcd, clock, name, signal, format = "markdown";
    bool dot = false;
    std::vector<std::string> names;
    Overrides ov_retrieve, ov_classify, ov_fix;

    auto* parse = app.add_subcommand("parse", "parse Verilog sources and/or an assertion list");
    parse->add_option("files", files, "Verilog sources")->check(CLI::ExistingFile);
    parse->add_option("--assertions", assertions_path, "assertion list")->check(CLI::ExistingFile);

    auto* cdfg_cmd = app.add_subcommand("cdfg", "build the control/data-flow graph");
    cdfg_cmd->add_option("files", files, "Verilog sources")->required()->check(CLI::ExistingFile);
    cdfg_cmd->add_option("--top", top, "top module");
    cdfg_cmd->add_flag("--dot", dot, "emit Graphviz DOT");
    cdfg_cmd->add_option("-o,--output", out, "output file");

    auto* retrieve = app.add_subcommand("retrieve", "coarse retrieval and filtering for one assertion or signal");
    ov_retrieve.add_to(retrieve, false);
    retrieve->add_option("name", name, "assertion name");
    retrieve->add_option("--signal", signal, "retrieve for a single signal instead");

    auto* classify_cmd = app.add_subcommand("classify", "classify failing assertions as timing or logic errors");
    ov_classify.add_to(classify_cmd, false);
    classify_cmd->add_option("names", names, "assertion names (default: all)");

    auto* check = app.add_subcommand("check", "evaluate one assertion on one VCD (exit 0 pass, 1 fail, 2 vacuous)");
    check->add_option("assertion", text, "assertion text")->required();
    check->add_option("vcd", vcd, "VCD trace")->required()->check(CLI::ExistingFile);
    check->add_option("--clock", clock, "clock signal when the assertion has no clocking event");

    auto* fix_cmd = app.add_subcommand("fix", "run retrieval, classification and repair on every assertion");
    ov_fix.add_to(fix_cmd, true);

    auto* report_cmd = app.add_subcommand("report", "render a report.json");
    report_cmd->add_option("report", name, "report.json")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--format", format, "markdown or json")->check(CLI::IsMember({"markdown", "json"}));
    report_cmd->add_option("-o,--output", out, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (*parse) return cmd_parse(files, assertions_path);
        if (*cdfg_cmd) return cmd_cdfg(files, top, dot, out);
        if (*retrieve) {
            if (name.empty() == signal.empty()) {
                std::cerr << "retrieve: give an assertion name or --signal\n" << retrieve->help();
                return kExitUsage;
            }
            return cmd_retrieve(ov_retrieve, name, signal);
        }
        if (*classify_cmd) return cmd_classify(ov_classify, names);
        if (*check) return cmd_check(text, vcd, clock);
        if (*fix_cmd) return cmd_fix(ov_fix);
        if (*report_cmd) return cmd_report(name, format, out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
