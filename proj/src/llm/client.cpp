#include "assertfix/llm/client.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "assertfix/error.hpp"

namespace assertfix::llm {

using json = nlohmann::json;

std::string normalize_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string Prompt::normalized() const {
    return normalize_text(system) + '\x1f' + normalize_text(user);
}

std::string Prompt::hash() const { return sha256_hex(normalized()); }

// ---- fixture store --------------------------------------------------------

namespace {

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

FixtureEntry entry_from_json(const json& j) {
    FixtureEntry e;
    e.hash = j.at("hash").get<std::string>();
    e.system = j.value("system", "");
    e.user = j.value("user", "");
    e.response = j.at("response").get<std::string>();
    e.backend = j.value("backend", "");
    e.timestamp = j.value("timestamp", "");
    return e;
}

} // namespace

FixtureStore::FixtureStore(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError(path_ + ":" + std::to_string(lineno) + ": malformed fixture line: " + e.what());
        }
        FixtureEntry e;
        try {
            e = entry_from_json(j);
        } catch (const json::exception& ex) {
            throw IoError(path_ + ":" + std::to_string(lineno) + ": " + ex.what());
        }
        if (entries_.count(e.hash)) warnings_.push_back("duplicate fixture hash " + e.hash + " (later entry wins)");
        entries_[e.hash] = std::move(e);
    }
}

std::optional<FixtureEntry> FixtureStore::lookup(const std::string& hash) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(hash);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

bool FixtureStore::record(const Prompt& p, const LlmResponse& r) {
    FixtureEntry e{p.hash(), p.system, p.user, r.text, r.backend, utc_timestamp()};
    json j = {{"hash", e.hash},         {"system", e.system},   {"user", e.user},
              {"response", e.response}, {"backend", e.backend}, {"timestamp", e.timestamp}};
    std::lock_guard lock(mu_);
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        if (!out) throw IoError("cannot append to fixture store " + path_);
        out << j.dump() << '\n';
        if (!out) throw IoError("write failed on fixture store " + path_);
    }
    bool replaced = entries_.count(e.hash) > 0;
    if (replaced) warnings_.push_back("duplicate fixture hash " + e.hash + " (overwritten)");
    entries_[e.hash] = std::move(e);
    return replaced;
}

std::size_t FixtureStore::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

// ---- backends -------------------------------------------------------------

LlmResponse ReplayBackend::complete(const Prompt& p) {
    auto h = p.hash();
    auto e = store_->lookup(h);
    if (!e) throw FixtureMiss(h);
    return LlmResponse{e->response, "replay", 0.0, std::nullopt, std::nullopt};
}

MockBackend::MockBackend(std::vector<Rule> rules) {
    for (auto& r : rules) add_rule(std::move(r.pattern), std::move(r.response));
}

void MockBackend::add_rule(std::string pattern, std::string response) {
    try {
        compiled_.emplace_back(std::regex(pattern, std::regex::ECMAScript), response);
    } catch (const std::regex_error& e) {
        throw ConfigError("bad mock rule pattern '" + pattern + "': " + e.what());
    }
    rules_.push_back(Rule{std::move(pattern), std::move(response)});
}

LlmResponse MockBackend::complete(const Prompt& p) {
    for (const auto& [re, resp] : compiled_) {
        if (std::regex_search(p.user, re)) return LlmResponse{resp, "mock", 0.0, std::nullopt, std::nullopt};
    }
    throw MockUnmatched("no mock rule matches prompt " + p.hash());
}

MockBackend MockBackend::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock rules " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError(path + ": mock rules must be a JSON array");
    MockBackend m;
    for (const auto& r : j) {
        if (!r.contains("pattern") || !r.contains("response")) throw ConfigError(path + ": rule needs pattern and response");
        m.add_rule(r["pattern"].get<std::string>(), r["response"].get<std::string>());
    }
    return m;
}

LlmResponse RecordingBackend::complete(const Prompt& p) {
    auto r = inner_->complete(p);
    store_->record(p, r);
    return r;
}

// ---- tag extraction -------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::vector<std::string> extract_tags(const std::string& text, const std::string& tag) {
    std::vector<std::string> out;
    const std::string open = "<" + tag + ">";
    const std::string close = "</" + tag + ">";
    std::size_t pos = 0;
    while (true) {
        auto b = text.find(open, pos);
        if (b == std::string::npos) break;
        b += open.size();
        auto e = text.find(close, b);
        if (e == std::string::npos) break;
        out.push_back(trim(text.substr(b, e - b)));
        pos = e + close.size();
    }
    return out;
}

std::optional<std::string> extract_tag(const std::string& text, const std::string& tag) {
    auto all = extract_tags(text, tag);
    if (all.empty()) return std::nullopt;
    return all.front();
}

} // namespace assertfix::llm
