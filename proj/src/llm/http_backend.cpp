#include <httplib.h>

#include <chrono>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "assertfix/error.hpp"
#include "assertfix/llm/client.hpp"

namespace assertfix::llm {

using json = nlohmann::json;

HttpConfig HttpConfig::from_env(HttpConfig base) {
    auto env = [](const char* k) -> std::string {
        const char* v = std::getenv(k);
        return v ? v : "";
    };
    if (base.endpoint.empty()) base.endpoint = env("ASSERTFIX_LLM_ENDPOINT");
    if (base.api_key.empty()) base.api_key = env("ASSERTFIX_LLM_API_KEY");
    if (base.model.empty()) base.model = env("ASSERTFIX_LLM_MODEL");
    return base;
}

HttpBackend::HttpBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty()) throw ConfigError("http backend needs an endpoint (ASSERTFIX_LLM_ENDPOINT)");
    if (cfg_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

namespace {

struct SplitUrl {
    std::string origin;
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

LlmResponse HttpBackend::complete(const Prompt& p) {
    {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
        ++in_flight_;
    }
    struct Release {
        HttpBackend* self;
        ~Release() {
            {
                std::lock_guard lock(self->mu_);
                --self->in_flight_;
            }
            self->cv_.notify_one();
        }
    } release{this};

    auto url = split_url(cfg_.endpoint);
    httplib::Client cli(url.origin);
    cli.set_connection_timeout(cfg_.timeout_seconds);
    cli.set_read_timeout(cfg_.timeout_seconds);
    cli.set_write_timeout(cfg_.timeout_seconds);

    json body = {{"model", cfg_.model},
                 {"temperature", cfg_.temperature},
                 {"messages", json::array({{{"role", "system"}, {"content", p.system}},
                                           {{"role", "user"}, {"content", p.user}}})}};
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    auto t0 = std::chrono::steady_clock::now();
    auto res = cli.Post(url.path, headers, body.dump(), "application/json");
    auto t1 = std::chrono::steady_clock::now();
    if (!res) throw LlmBackendError("http request failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
        throw LlmBackendError("http status " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    LlmResponse out;
    out.backend = "http";
    out.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    try {
        auto j = json::parse(res->body);
        out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            const auto& u = j["usage"];
            if (u.contains("prompt_tokens")) out.prompt_tokens = u["prompt_tokens"].get<int>();
            if (u.contains("completion_tokens")) out.completion_tokens = u["completion_tokens"].get<int>();
        }
    } catch (const json::exception& e) {
        throw LlmBackendError(std::string("malformed chat-completion response: ") + e.what());
    }
    return out;
}

} // namespace assertfix::llm
