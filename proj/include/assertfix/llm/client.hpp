#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace assertfix::llm {

struct Prompt {
    std::string system;
    std::string user;

    /// CRLF -> LF, whitespace runs collapsed to one space, ends trimmed; the
    /// two parts are joined by U+001F.
    std::string normalized() const;
    /// Lowercase hex SHA-256 of normalized().
    std::string hash() const;
};

/// Idempotent text normalization used by Prompt::normalized().
std::string normalize_text(const std::string& text);
std::string sha256_hex(const std::string& bytes);

struct LlmResponse {
    std::string text;
    std::string backend;
    double latency_ms = 0;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Thread-safe. Throws LlmBackendError, FixtureMiss, or MockUnmatched.
    virtual LlmResponse complete(const Prompt& p) = 0;
    virtual std::string id() const = 0;
};

// ---- fixture store --------------------------------------------------------

struct FixtureEntry {
    std::string hash;
    std::string system;
    std::string user;
    std::string response;
    std::string backend;
    std::string timestamp;
};

/// JSONL store keyed by prompt hash. Later lines override earlier ones.
class FixtureStore {
public:
    FixtureStore() = default;
    /// Load `path` if it exists; records are appended to it.
    explicit FixtureStore(std::string path);

    std::optional<FixtureEntry> lookup(const std::string& hash) const;
    /// Append a record. Returns true when it replaced an existing hash.
    bool record(const Prompt& p, const LlmResponse& r);
    std::size_t size() const;
    const std::string& path() const noexcept { return path_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    std::string path_;
    mutable std::mutex mu_;
    std::map<std::string, FixtureEntry> entries_;
    std::vector<std::string> warnings_;
};

// ---- backends -------------------------------------------------------------

struct HttpConfig {
    std::string endpoint; // e.g. https://api.example.com/v1/chat/completions
    std::string api_key;
    std::string model;
    double temperature = 0.0;
    int max_in_flight = 4;
    int timeout_seconds = 120;

    /// Fill unset fields from ASSERTFIX_LLM_ENDPOINT / _API_KEY / _MODEL.
    static HttpConfig from_env(HttpConfig base);
};

/// Chat-completions over HTTP(S).
class HttpBackend : public LlmClient {
public:
    explicit HttpBackend(HttpConfig cfg);
    LlmResponse complete(const Prompt& p) override;
    std::string id() const override { return "http"; }

private:
    HttpConfig cfg_;
    std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
};

class ReplayBackend : public LlmClient {
public:
    explicit ReplayBackend(std::shared_ptr<const FixtureStore> store) : store_(std::move(store)) {}
    LlmResponse complete(const Prompt& p) override;
    std::string id() const override { return "replay"; }

private:
    std::shared_ptr<const FixtureStore> store_;
};

/// First rule whose regex matches the user text (ECMAScript, search) wins.
class MockBackend : public LlmClient {
public:
    struct Rule {
        std::string pattern;
        std::string response;
    };

    MockBackend() = default;
    explicit MockBackend(std::vector<Rule> rules);
    void add_rule(std::string pattern, std::string response);
    LlmResponse complete(const Prompt& p) override;
    std::string id() const override { return "mock"; }

    /// Rules from a JSON array of {"pattern", "response"}.
    static MockBackend from_json_file(const std::string& path);

private:
    std::vector<std::pair<std::regex, std::string>> compiled_;
    std::vector<Rule> rules_;
};

/// Passes through to `inner` and appends every response to the store.
class RecordingBackend : public LlmClient {
public:
    RecordingBackend(std::shared_ptr<LlmClient> inner, std::shared_ptr<FixtureStore> store)
        : inner_(std::move(inner)), store_(std::move(store)) {}
    LlmResponse complete(const Prompt& p) override;
    std::string id() const override { return inner_->id(); }

private:
    std::shared_ptr<LlmClient> inner_;
    std::shared_ptr<FixtureStore> store_;
};

/// Text between the first `<tag>` and the following `</tag>`, trimmed.
std::optional<std::string> extract_tag(const std::string& text, const std::string& tag);
/// All `<tag>...</tag>` bodies in order.
std::vector<std::string> extract_tags(const std::string& text, const std::string& tag);

} // namespace assertfix::llm
