#include "assertfix/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "assertfix/classify/classify.hpp"
#include "assertfix/error.hpp"

namespace assertfix::pipeline {

using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("write failed: " + p.string());
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

int positive_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        int n = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::string safe_name(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') ? c : '_';
    return out.empty() ? "_" : out;
}

} // namespace

void PipelineConfig::validate() const {
    if (shift_bound < 1) throw ConfigError("shift_bound must be >= 1");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (candidate_cap < 1) throw ConfigError("candidate_cap must be >= 1");
    if (jobs < 0) throw ConfigError("jobs must be >= 0");
    static const std::set<std::string> backends{"none", "mock", "replay", "http"};
    if (!backends.count(backend)) throw ConfigError("unknown backend '" + backend + "'");
    if (sources.empty()) throw ConfigError("no design sources");
    for (const auto& s : sources) {
        if (!fs::exists(resolve(s))) throw ConfigError("source not found: " + s);
    }
    if (assertions.empty() || !fs::exists(resolve(assertions))) throw ConfigError("assertion list not found: " + assertions.string());
    if (traces.empty() || !fs::is_directory(resolve(traces))) throw ConfigError("trace directory not found: " + traces.string());
    if (backend == "replay" && !record && !fs::exists(resolve(fixtures))) {
        throw ConfigError("fixture file not found: " + fixtures.string());
    }
    if (backend == "mock" && !fs::exists(resolve(mock_rules))) throw ConfigError("mock rules not found: " + mock_rules.string());
}

PipelineConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("config not found: " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    static const std::map<std::string, std::set<std::string>> known{
        {"design", {"name", "sources", "top", "clock"}},
        {"inputs", {"assertions", "traces"}},
        {"llm", {"backend", "fixtures", "mock_rules", "record", "endpoint", "model", "max_in_flight", "timeout"}},
        {"run", {"shift_bound", "top_k", "candidate_cap", "jobs", "seed", "out"}},
    };
    PipelineConfig cfg;
    cfg.base_dir = fs::absolute(path).parent_path();
    for (const auto& [section, body] : tree) {
        auto sec = known.find(section);
        if (sec == known.end()) throw ConfigError("config: unknown section [" + section + "]");
        for (const auto& [key, node] : body) {
            if (!sec->second.count(key)) throw ConfigError("config: unknown key " + section + "." + key);
            const std::string v = node.get_value<std::string>();
            const std::string k = section + "." + key;
            if (k == "design.name") cfg.design = v;
            else if (k == "design.sources") cfg.sources = split_ws(v);
            else if (k == "design.top") cfg.top = v;
            else if (k == "design.clock") cfg.clock = v;
            else if (k == "inputs.assertions") cfg.assertions = v;
            else if (k == "inputs.traces") cfg.traces = v;
            else if (k == "llm.backend") cfg.backend = v;
            else if (k == "llm.fixtures") cfg.fixtures = v;
            else if (k == "llm.mock_rules") cfg.mock_rules = v;
            else if (k == "llm.record") cfg.record = parse_bool(k, v);
            else if (k == "llm.endpoint") cfg.http.endpoint = v;
            else if (k == "llm.model") cfg.http.model = v;
            else if (k == "llm.max_in_flight") cfg.http.max_in_flight = positive_int(k, v);
            else if (k == "llm.timeout") cfg.http.timeout_seconds = positive_int(k, v);
            else if (k == "run.shift_bound") cfg.shift_bound = positive_int(k, v);
            else if (k == "run.top_k") cfg.top_k = positive_int(k, v);
            else if (k == "run.candidate_cap") cfg.candidate_cap = positive_int(k, v);
            else if (k == "run.jobs") cfg.jobs = positive_int(k, v);
            else if (k == "run.seed") cfg.seed = static_cast<std::uint64_t>(positive_int(k, v));
            else if (k == "run.out") cfg.out = v;
        }
    }
    return cfg;
}

std::vector<fs::path> find_traces(const fs::path& dir, const std::string& name) {
    std::vector<fs::path> out;
    if (fs::exists(dir / (name + ".vcd"))) out.push_back(dir / (name + ".vcd"));
    std::vector<fs::path> more;
    if (fs::is_directory(dir)) {
        const std::string prefix = name + ".";
        for (const auto& e : fs::directory_iterator(dir)) {
            auto f = e.path().filename().string();
            if (f.size() > prefix.size() + 4 && f.rfind(prefix, 0) == 0 && f.substr(f.size() - 4) == ".vcd") {
                more.push_back(e.path());
            }
        }
    }
    std::sort(more.begin(), more.end());
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

std::shared_ptr<llm::LlmClient> make_backend(const PipelineConfig& cfg) {
    std::shared_ptr<llm::LlmClient> inner;
    if (cfg.backend == "none") return nullptr;
    if (cfg.backend == "mock") {
        inner = std::make_shared<llm::MockBackend>(llm::MockBackend::from_json_file(cfg.resolve(cfg.mock_rules).string()));
    } else if (cfg.backend == "http") {
        inner = std::make_shared<llm::HttpBackend>(llm::HttpConfig::from_env(cfg.http));
    } else if (cfg.backend == "replay") {
        auto store = std::make_shared<llm::FixtureStore>(cfg.resolve(cfg.fixtures).string());
        return std::make_shared<llm::ReplayBackend>(store);
    } else {
        throw ConfigError("unknown backend '" + cfg.backend + "'");
    }
    if (!cfg.record) return inner;
    if (cfg.fixtures.empty()) throw ConfigError("recording needs a fixture path");
    auto store = std::make_shared<llm::FixtureStore>(cfg.resolve(cfg.fixtures).string());
    return std::make_shared<llm::RecordingBackend>(inner, store);
}

DesignContext load_design(const PipelineConfig& cfg) {
    std::vector<hdl::SourceInput> inputs;
    for (const auto& s : cfg.sources) inputs.push_back({s, read_file(cfg.resolve(s))});
    DesignContext ctx;
    ctx.ast = hdl::parse_design(inputs);
    ctx.g = cdfg::build_cdfg(ctx.ast, cfg.top);
    ctx.index = std::make_unique<retrieval::ChunkIndex>(retrieval::chunk_design(ctx.ast));
    return ctx;
}

namespace {

json candidates_json(const fix::FixOutcome& o) {
    json arr = json::array();
    for (std::size_t i = 0; i < o.candidates.size(); ++i) {
        const auto& c = o.candidates[i];
        const auto& v = o.validations[i];
        arr.push_back({{"assertion", hdl::render_assertion(c.assertion)},
                       {"origin", std::string(fix::to_string(c.origin))},
                       {"side", std::string(fix::to_string(c.side))},
                       {"before", c.before},
                       {"after", c.after},
                       {"low_confidence", c.low_confidence},
                       {"shift", c.shift ? json(*c.shift) : json(nullptr)},
                       {"passed", v.passed},
                       {"covered", v.covered},
                       {"error", v.error.empty() ? json(nullptr) : json(v.error)},
                       {"accepted", o.accepted && *o.accepted == i}});
    }
    return arr;
}

json classification_json(const classify::ErrorClassification& c) {
    json j{{"kind", std::string(classify::to_string(c.kind))},
           {"source", std::string(classify::to_string(c.source))},
           {"shift", c.shift ? json(*c.shift) : json(nullptr)},
           {"rationale", c.rationale},
           {"llm_answer", c.llm_answer}};
    if (c.mismatch) {
        j["mismatch"] = {{"target", c.mismatch->target},
                         {"signal", c.mismatch->signal},
                         {"antecedent_value", c.mismatch->antecedent_value},
                         {"guard_value", c.mismatch->guard_value},
                         {"guard", c.mismatch->guard},
                         {"line", c.mismatch->span.begin_line}};
    } else {
        j["mismatch"] = nullptr;
    }
    return j;
}

std::string prompts_text(const std::vector<llm::Prompt>& prompts) {
    std::ostringstream os;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        os << "=== prompt " << i + 1 << " sha256 " << prompts[i].hash() << "\n--- system\n"
           << prompts[i].system << "\n--- user\n"
           << prompts[i].user << "\n";
    }
    return os.str();
}

struct Worker {
    const PipelineConfig& cfg;
    const DesignContext& ctx;
    llm::LlmClient* llm;

    AssertionResult run(const hdl::NamedAssertion& na) const {
        AssertionResult res;
        auto& row = res.row;
        row.design = cfg.design;
        row.name = na.name;
        row.original = hdl::render_assertion(na.assertion);
        res.assertion = na.assertion;

        std::vector<llm::Prompt> prompts;
        json retrieved = json::array();
        std::string kept_json = "[]";
        std::optional<classify::ErrorClassification> cls;
        std::optional<fix::FixOutcome> outcome;
        try {
            run_stages(na, res, prompts, retrieved, kept_json, cls, outcome);
        } catch (const FixtureMiss& e) {
            row.status = report::AssertionStatus::Unfixed;
            row.error = std::string("fixture miss: ") + e.what();
        } catch (const std::exception& e) {
            row.status = report::AssertionStatus::Error;
            row.error = e.what();
        }
        if (cls) {
            row.kind = std::string(classify::to_string(cls->kind));
            row.source = std::string(classify::to_string(cls->source));
        }
        if (outcome) {
            row.candidates_tried = static_cast<int>(outcome->candidates.size());
            row.notes.insert(row.notes.end(), outcome->notes.begin(), outcome->notes.end());
            if (const auto* acc = outcome->accepted_candidate()) {
                row.status = report::AssertionStatus::Fixed;
                row.origin = std::string(fix::to_string(acc->origin));
                row.fixed = hdl::render_assertion(acc->assertion);
                row.shift = acc->shift;
                res.fixed = acc->assertion;
            } else {
                row.status = report::AssertionStatus::Unfixed;
            }
            res.outcome = std::move(outcome);
        }
        if (!cfg.out.empty()) dump(res, prompts, retrieved, kept_json, cls);
        return res;
    }

    void run_stages(const hdl::NamedAssertion& na, AssertionResult& res, std::vector<llm::Prompt>& prompts, json& retrieved,
                    std::string& kept_json, std::optional<classify::ErrorClassification>& cls,
                    std::optional<fix::FixOutcome>& outcome) const {
        const auto& a = na.assertion;
        std::string clock = a.clock ? a.clock->signal : cfg.clock;
        if (clock.empty()) throw ConfigError("no clock for assertion " + na.name);
        auto paths = find_traces(cfg.resolve(cfg.traces), na.name);
        if (paths.empty()) throw NoTraces();
        std::vector<trace::CounterexampleTrace> traces;
        for (const auto& p : paths) traces.push_back(trace::parse_vcd_file(p.string(), clock));

        bool failing = false;
        for (const auto& t : traces) failing = failing || !trace::evaluate_assertion(a, t).passed();
        if (!failing) {
            res.row.status = report::AssertionStatus::Passing;
            return;
        }

        // Stage 1
        auto scored = retrieval::retrieve_for_assertion(*ctx.index, a, cfg.top_k, &res.row.notes);
        for (const auto& s : scored) retrieved.push_back({{"id", s.chunk->id}, {"score", s.score}});
        if (llm) prompts.push_back(retrieval::build_filter_prompt(scored, a));
        auto kept = retrieval::fine_filter(scored, a, ctx.g, llm, &res.row.notes);
        kept_json = retrieval::dump_chunks_json(kept);

        // Stage 2
        if (llm) prompts.push_back(classify::build_classification_prompt(a, traces, kept, &ctx.g));
        cls = classify::classify_error(a, traces, kept, ctx.g, llm, cfg.shift_bound);

        // Stage 3
        fix::FixOutcome out;
        if (cls->kind == classify::ErrorKind::Timing) {
            out = fix::fix_timing(a, traces, kept, llm, cfg.shift_bound, &ctx.g);
        } else {
            out = fix::fix_logic_bar(a, ctx.g, traces, kept, llm, static_cast<std::size_t>(cfg.candidate_cap));
        }
        out.classification = *cls;
        prompts.insert(prompts.end(), out.prompts.begin(), out.prompts.end());
        outcome = std::move(out);
    }

    void dump(const AssertionResult& res, const std::vector<llm::Prompt>& prompts, const json& retrieved,
              const std::string& kept_json, const std::optional<classify::ErrorClassification>& cls) const {
        auto dir = cfg.resolve(cfg.out) / "artifacts" / safe_name(res.row.name);
        fs::create_directories(dir);
        write_file(dir / "prompts.txt", prompts_text(prompts));
        write_file(dir / "retrieved.json", retrieved.dump(2) + "\n");
        write_file(dir / "chunks.json", kept_json);
        write_file(dir / "candidates.json", (res.outcome ? candidates_json(*res.outcome) : json::array()).dump(2) + "\n");
        json verdict{{"name", res.row.name},
                     {"status", std::string(report::to_string(res.row.status))},
                     {"original", res.row.original},
                     {"fixed", res.row.fixed ? json(*res.row.fixed) : json(nullptr)},
                     {"error", res.row.error ? json(*res.row.error) : json(nullptr)},
                     {"classification", cls ? classification_json(*cls) : json(nullptr)}};
        write_file(dir / "verdict.json", verdict.dump(2) + "\n");
    }
};

} // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, llm::LlmClient* llm) {
    cfg.validate();
    auto list = hdl::load_assertions(cfg.resolve(cfg.assertions).string());
    auto ctx = load_design(cfg);
    if (!cfg.out.empty()) fs::create_directories(cfg.resolve(cfg.out));

    PipelineResult result;
    result.results.resize(list.size());
    Worker worker{cfg, ctx, llm};
    std::size_t width = cfg.jobs > 0 ? static_cast<std::size_t>(cfg.jobs) : std::max(1u, std::thread::hardware_concurrency());
    width = std::min(width, std::max<std::size_t>(list.size(), 1));
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < width; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < list.size(); i = next++) result.results[i] = worker.run(list[i]);
            });
        }
    }

    auto& r = result.report;
    r.config.backend = cfg.backend;
    r.config.shift_bound = cfg.shift_bound;
    r.config.top_k = cfg.top_k;
    r.config.candidate_cap = cfg.candidate_cap;
    r.config.seed = cfg.seed;
    std::vector<fix::FixOutcome> outcomes;
    std::vector<hdl::SvaAssertion> before, after;
    for (const auto& res : result.results) {
        r.assertions.push_back(res.row);
        if (res.outcome) outcomes.push_back(*res.outcome);
        if (res.assertion) {
            before.push_back(*res.assertion);
            after.push_back(res.fixed ? *res.fixed : *res.assertion);
        }
    }
    auto m = report::fr_metrics(cfg.design, outcomes);
    m.coi_before = report::coi_coverage(ctx.g, before, &r.warnings);
    m.coi_after = report::coi_coverage(ctx.g, after);
    r.designs.push_back(std::move(m));
    return result;
}

PipelineResult run_and_emit(const PipelineConfig& cfg) {
    cfg.validate();
    auto client = make_backend(cfg);
    auto result = run_pipeline(cfg, client.get());
    if (!cfg.out.empty()) {
        auto dir = cfg.resolve(cfg.out);
        report::write_report(result.report, report::Format::Json, dir / "report.json");
        report::write_report(result.report, report::Format::Markdown, dir / "report.md");
    }
    return result;
}

BenchmarkManifest load_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
        BenchmarkManifest m;
        m.design = j.at("design").get<std::string>();
        m.loc = j.at("loc").get<int>();
        m.sources = j.at("sources").get<std::vector<std::string>>();
        m.assertions = j.at("assertions").get<std::map<std::string, int>>();
        m.base_dir = fs::absolute(path).parent_path();
        if (j.contains("root")) m.base_dir /= j["root"].get<std::string>();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError("manifest " + path.string() + ": " + e.what());
    }
}

int count_loc(const std::string& text) {
    int n = 0;
    bool in_block = false;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        bool code = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (in_block) {
                if (line.compare(i, 2, "*/") == 0) {
                    in_block = false;
                    ++i;
                }
                continue;
            }
            if (line.compare(i, 2, "//") == 0) break;
            if (line.compare(i, 2, "/*") == 0) {
                in_block = true;
                ++i;
                continue;
            }
            if (!std::isspace(static_cast<unsigned char>(line[i]))) code = true;
        }
        n += code;
    }
    return n;
}

ManifestCheck check_manifest(const BenchmarkManifest& m) {
    ManifestCheck c;
    c.sources_present = !m.sources.empty();
    for (const auto& s : m.sources) {
        auto p = m.base_dir / s;
        if (!fs::exists(p)) {
            c.sources_present = false;
            continue;
        }
        if (!fs::is_directory(p)) {
            c.counted += count_loc(read_file(p));
            continue;
        }
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(p)) {
            auto ext = e.path().extension();
            if (e.is_regular_file() && (ext == ".v" || ext == ".sv" || ext == ".vh")) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) c.counted += count_loc(read_file(f));
    }
    c.within_tolerance = c.sources_present && std::abs(c.counted - m.loc) * 50 <= m.loc;
    return c;
}

} // namespace assertfix::pipeline
