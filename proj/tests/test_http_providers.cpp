#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "smartsearch/errors.hpp"
#include "smartsearch/providers.hpp"

using namespace smartsearch;
using json = nlohmann::json;

namespace {

// Local stand-in for the external services, one route per provider.
class FakeServices {
public:
    FakeServices() {
        server_.Post("/chat", [this](const httplib::Request& req, httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            const auto body = json::parse(req.body);
            const auto prompt = body["messages"][0]["content"].get<std::string>();
            res.set_content(json{{"choices", {{{"message", {{"content", "echo:" + prompt}}}}}}}.dump(), "application/json");
        });
        server_.Post("/flaky", [this](const httplib::Request&, httplib::Response& res) {
            if (flaky_calls++ < 2) {
                res.status = 503;
                return;
            }
            res.set_content(R"({"choices":[{"message":{"content":"ok"}}]})", "application/json");
        });
        server_.Post("/forbidden", [this](const httplib::Request&, httplib::Response& res) {
            ++forbidden_calls;
            res.status = 403;
        });
        server_.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json", "text/plain");
        });
        server_.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
            std::this_thread::sleep_for(std::chrono::milliseconds(600));
            res.set_content("{}", "application/json");
        });
        server_.Post("/embed", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"data":[{"embedding":[0.6,0.8,0.0]}]})", "application/json");
        });
        server_.Post("/translate", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = json::parse(req.body);
            res.set_content(json{{"translatedText", body["target"].get<std::string>() + ":" + body["q"].get<std::string>()}}.dump(),
                            "application/json");
        });
        server_.Post("/detect", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"([{"language":"ko","confidence":97}])", "application/json");
        });
        server_.Post("/rerank", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = json::parse(req.body);
            json results = json::array();
            const auto n = body["documents"].size();
            for (std::size_t i = 0; i < n; ++i) results.push_back({{"index", n - 1 - i}, {"relevance_score", 0.1 * double(n - 1 - i)}});
            res.set_content(json{{"results", results}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServices() {
        server_.stop();
        thread_.join();
    }

    ProviderConfig config(ProviderKind kind, const std::string& path, int retries = 2,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) const {
        auto cfg = provider_config(kind);
        cfg.backend = Backend::http;
        cfg.endpoint = "http://127.0.0.1:" + std::to_string(port_) + path;
        cfg.max_retries = retries;
        cfg.timeout = timeout;
        return cfg;
    }

    std::string last_auth;
    std::atomic<int> flaky_calls{0};
    std::atomic<int> forbidden_calls{0};

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

} // namespace

TEST(HttpProviders, ChatCompletionWithAuth) {
    FakeServices svc;
    auto cfg = svc.config(ProviderKind::llm, "/chat");
    cfg.auth_env_var = "SMARTSEARCH_TEST_KEY";
    ::setenv("SMARTSEARCH_TEST_KEY", "sekret", 1);
    EXPECT_EQ(HttpLlm(cfg).complete("hi"), "echo:hi");
    ::unsetenv("SMARTSEARCH_TEST_KEY");
    EXPECT_EQ(svc.last_auth, "Bearer sekret");
}

TEST(HttpProviders, RetriesTransientStatus) {
    FakeServices svc;
    EXPECT_EQ(HttpLlm(svc.config(ProviderKind::llm, "/flaky", 2)).complete("x"), "ok");
    EXPECT_EQ(svc.flaky_calls.load(), 3);
}

TEST(HttpProviders, ClientErrorIsNotRetried) {
    FakeServices svc;
    try {
        HttpLlm(svc.config(ProviderKind::llm, "/forbidden", 3)).complete("x");
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.kind(), ProviderError::Kind::status);
    }
    EXPECT_EQ(svc.forbidden_calls.load(), 1);
}

TEST(HttpProviders, MalformedBody) {
    FakeServices svc;
    try {
        HttpLlm(svc.config(ProviderKind::llm, "/garbage")).complete("x");
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.kind(), ProviderError::Kind::malformed);
    }
}

TEST(HttpProviders, TimeoutBoundsTotalWait) {
    FakeServices svc;
    const auto start = std::chrono::steady_clock::now();
    EXPECT_THROW(HttpLlm(svc.config(ProviderKind::llm, "/slow", 1, std::chrono::milliseconds(200))).complete("x"),
                 ProviderError);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    EXPECT_LT(elapsed, std::chrono::milliseconds(200 * 2 + 300));
}

TEST(HttpProviders, Unreachable) {
    auto cfg = provider_config(ProviderKind::llm);
    cfg.backend = Backend::http;
    cfg.endpoint = "http://127.0.0.1:1/chat";
    cfg.max_retries = 0;
    cfg.timeout = std::chrono::milliseconds(300);
    EXPECT_THROW(HttpLlm(cfg).complete("x"), ProviderError);
}

TEST(HttpProviders, EmbedTranslateDetectRerank) {
    FakeServices svc;
    const HttpEmbedder embedder(svc.config(ProviderKind::embedding, "/embed"));
    EXPECT_EQ(embedder.embed("lion").values, (std::vector<double>{0.6, 0.8, 0.0}));
    EXPECT_EQ(embedder.dims(), 3u);
    EXPECT_THROW(embedder.embed(""), ProviderError);

    const HttpTranslator translator(svc.config(ProviderKind::translation, "/translate"));
    EXPECT_EQ(translator.translate("lion", "en", "ko"), "ko:lion");
    EXPECT_EQ(translator.translate("lion", "en", "en"), "lion");

    const auto tag = HttpDetector(svc.config(ProviderKind::detection, "/detect")).detect("사자");
    EXPECT_EQ(tag.code, "ko");
    EXPECT_DOUBLE_EQ(tag.confidence, 0.97);

    const auto scores = HttpReranker(svc.config(ProviderKind::rerank, "/rerank")).score("q", {"a", "b", "c"});
    ASSERT_EQ(scores.size(), 3u);
    EXPECT_NEAR(scores[0], 0.0, 1e-12);
    EXPECT_NEAR(scores[2], 0.2, 1e-12);
}

TEST(HttpProviders, FactorySwitchesBackends) {
    FakeServices svc;
    ProviderSetConfig cfg;
    cfg.llm = svc.config(ProviderKind::llm, "/chat");
    const auto set = make_providers(cfg);
    EXPECT_EQ(set.llm->complete("ping"), "echo:ping");
    EXPECT_EQ(set.embedder->describe(), "mock-embed(dims=256,seed=0)");
}
