#include <gtest/gtest.h>

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "assertfix/error.hpp"
#include "assertfix/llm/client.hpp"

using namespace assertfix;
using namespace assertfix::llm;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    auto dir = fs::temp_directory_path() / "assertfix_test_llm";
    fs::create_directories(dir);
    auto p = dir / (name + "_" + std::to_string(::getpid()));
    fs::remove(p);
    return p;
}

std::string random_text(std::mt19937_64& rng) {
    static const std::string alphabet = "abcdefXYZ019 _|->#$(),=\n\t\r{}'";
    std::uniform_int_distribution<int> len(0, 80);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    int n = len(rng);
    for (int i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
    return s;
}

} // namespace

TEST(LlmPrompt, NormalizationIsIdempotent) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        auto t = random_text(rng);
        auto n = normalize_text(t);
        EXPECT_EQ(normalize_text(n), n);
        EXPECT_EQ(n.find('\r'), std::string::npos);
    }
    EXPECT_EQ(normalize_text("  a \r\n\r\n b\t c  "), "a b c");
}

TEST(LlmPrompt, HashMatchesHashlib) {
    // sha256(" ".join(s.split()) + "\x1f" + " ".join(u.split())) computed with Python hashlib
    EXPECT_EQ((Prompt{"You are a verification engineer.", "Classify:\r\n  a |-> b\n\n"}.hash()),
              "f767f2743f4c6b56db86a5d893c5099d1ebdeb18238e3be273b8684ee0fc017e");
    EXPECT_EQ((Prompt{"", ""}.hash()), "ffe679bb831c95b67dc17819c63c5090d221aac6f4c7bf530f594ab43d21fa1e");
    EXPECT_EQ((Prompt{"sys", "  x\t\ty  "}.hash()), "a50ff343765bf3e82d037178e0f169aa7cb234c442abe39048df614965531ffc");
}

TEST(LlmPrompt, HashDependsOnlyOnNormalizedText) {
    Prompt a{"s", "line one\nline two"};
    Prompt b{"  s ", "line one\r\n   line two\n"};
    EXPECT_EQ(a.hash(), b.hash());
    Prompt c{"s", "line one line three"};
    EXPECT_NE(a.hash(), c.hash());
    // the separator keeps system/user boundaries distinct
    EXPECT_NE((Prompt{"a b", "c"}.hash()), (Prompt{"a", "b c"}.hash()));
}

TEST(LlmReplay, LookupAndMiss) {
    auto store = std::make_shared<FixtureStore>();
    Prompt p{"sys", "Is this Timing or Logic?"};
    store->record(p, LlmResponse{"Timing", "mock"});
    ReplayBackend replay(store);
    EXPECT_EQ(replay.complete(p).text, "Timing");
    Prompt q{"sys", "something else"};
    try {
        replay.complete(q);
        FAIL() << "expected FixtureMiss";
    } catch (const FixtureMiss& e) {
        EXPECT_EQ(e.hash(), q.hash());
        EXPECT_NE(std::string(e.what()).find(q.hash()), std::string::npos);
    }
}

TEST(LlmFixtureStore, DuplicateOverwritesWithWarning) {
    auto path = temp_file("dup.jsonl");
    {
        FixtureStore s(path.string());
        Prompt p{"a", "b"};
        EXPECT_FALSE(s.record(p, LlmResponse{"first", "mock"}));
        EXPECT_TRUE(s.record(p, LlmResponse{"second", "mock"}));
        EXPECT_EQ(s.size(), 1u);
        EXPECT_EQ(s.warnings().size(), 1u);
        EXPECT_EQ(s.lookup(p.hash())->response, "second");
    }
    FixtureStore reopened(path.string());
    EXPECT_EQ(reopened.size(), 1u);
    EXPECT_EQ(reopened.lookup(Prompt{"a", "b"}.hash())->response, "second");
}

TEST(LlmFixtureStore, HundredRandomPromptsReplayable) {
    auto path = temp_file("random.jsonl");
    std::mt19937_64 rng(11);
    std::vector<std::pair<Prompt, std::string>> recorded;
    {
        FixtureStore s(path.string());
        for (int i = 0; i < 100; ++i) {
            Prompt p{random_text(rng), random_text(rng) + "#" + std::to_string(i)};
            std::string resp = random_text(rng) + "é→";
            s.record(p, LlmResponse{resp, "http"});
            recorded.emplace_back(p, resp);
        }
    }
    auto store = std::make_shared<FixtureStore>(path.string());
    ASSERT_EQ(store->size(), 100u);
    ReplayBackend replay(store);
    for (const auto& [p, resp] : recorded) EXPECT_EQ(replay.complete(p).text, resp);
}

TEST(LlmFixtureStore, MalformedLineIsIoError) {
    auto path = temp_file("bad.jsonl");
    std::ofstream(path) << "{not json\n";
    EXPECT_THROW(FixtureStore(path.string()), IoError);
}

TEST(LlmMock, RulesAndUnmatched) {
    MockBackend m({{"wb_adr_i", "<answer>Logic</answer>"}, {".*", "<answer>Timing</answer>"}});
    EXPECT_EQ(m.complete(Prompt{"", "check wb_adr_i == 3'b100"}).text, "<answer>Logic</answer>");
    EXPECT_EQ(m.complete(Prompt{"", "other"}).text, "<answer>Timing</answer>");
    MockBackend none(std::vector<MockBackend::Rule>{{"^never$", "x"}});
    EXPECT_THROW(none.complete(Prompt{"", "text"}), MockUnmatched);
    EXPECT_THROW(MockBackend(std::vector<MockBackend::Rule>{{"(", "x"}}), ConfigError);
}

TEST(LlmTags, Extraction) {
    EXPECT_EQ(extract_tag("noise <answer> Timing </answer> tail", "answer"), std::optional<std::string>("Timing"));
    EXPECT_FALSE(extract_tag("<answer>unterminated", "answer"));
    auto all = extract_tags("<keep>2</keep> and <keep>5</keep>", "keep");
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[1], "5");
}

TEST(LlmHttp, RecordThenReplayAgainstStubServer) {
    httplib::Server svr;
    std::atomic<int> hits{0};
    nlohmann::json last_request;
    std::mutex mu;
    svr.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        auto j = nlohmann::json::parse(req.body);
        {
            std::lock_guard lock(mu);
            last_request = j;
        }
        std::string user = j["messages"][1]["content"];
        nlohmann::json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + user}}}}}},
                               {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}};
        res.set_content(body.dump(), "application/json");
    });
    svr.Post("/fail", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("overloaded", "text/plain");
    });
    int port = svr.bind_to_any_port("127.0.0.1");
    std::thread th([&] { svr.listen_after_bind(); });
    svr.wait_until_ready();

    auto path = temp_file("record.jsonl");
    std::string base = "http://127.0.0.1:" + std::to_string(port);
    {
        HttpConfig cfg;
        cfg.endpoint = base + "/v1/chat/completions";
        cfg.model = "stub-model";
        cfg.api_key = "k";
        auto http = std::make_shared<HttpBackend>(cfg);
        auto store = std::make_shared<FixtureStore>(path.string());
        RecordingBackend rec(http, store);
        auto r = rec.complete(Prompt{"sys", "hello\r\nworld"});
        EXPECT_EQ(r.text, "echo: hello\r\nworld");
        EXPECT_EQ(r.backend, "http");
        EXPECT_EQ(r.prompt_tokens, 12);
        std::lock_guard lock(mu);
        EXPECT_EQ(last_request["model"], "stub-model");
        EXPECT_EQ(last_request["temperature"], 0.0);
        EXPECT_EQ(last_request["messages"][0]["role"], "system");
    }
    EXPECT_EQ(hits.load(), 1);
    {
        auto store = std::make_shared<FixtureStore>(path.string());
        ReplayBackend replay(store);
        EXPECT_EQ(replay.complete(Prompt{"sys", "hello\r\nworld"}).text, "echo: hello\r\nworld");
    }
    EXPECT_EQ(hits.load(), 1);

    HttpConfig bad;
    bad.endpoint = base + "/fail";
    HttpBackend failing(bad);
    EXPECT_THROW(failing.complete(Prompt{"", "x"}), LlmBackendError);

    svr.stop();
    th.join();
}

TEST(LlmHttp, ConcurrentCallsRespectInFlightCap) {
    httplib::Server svr;
    std::atomic<int> current{0}, peak{0};
    svr.Post("/c", [&](const httplib::Request&, httplib::Response& res) {
        int now = ++current;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        --current;
        res.set_content(R"({"choices":[{"message":{"content":"ok"}}]})", "application/json");
    });
    int port = svr.bind_to_any_port("127.0.0.1");
    std::thread th([&] { svr.listen_after_bind(); });
    svr.wait_until_ready();

    HttpConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/c";
    cfg.max_in_flight = 2;
    HttpBackend http(cfg);
    std::vector<std::thread> workers;
    for (int i = 0; i < 8; ++i) {
        workers.emplace_back([&, i] { EXPECT_EQ(http.complete(Prompt{"", std::to_string(i)}).text, "ok"); });
    }
    for (auto& w : workers) w.join();
    EXPECT_LE(peak.load(), 2);
    svr.stop();
    th.join();
}
