#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "smartsearch/errors.hpp"
#include "smartsearch/indexing.hpp"
#include "smartsearch/providers.hpp"
#include "smartsearch/text.hpp"

using namespace smartsearch;

TEST(MockLlm, CitingOracleListsFilesInOrder) {
    const std::string prompt = std::string(kTaskSynthesize) +
                               "\n[file_id: 1] type: image | title: One\ntext\n\n"
                               "[file_id: 2] type: audio | title: Two\ntext\n\n"
                               "[file_id: 1] type: image | title: One\nmore\n\n";
    EXPECT_EQ(MockLlm().complete(prompt), "Recommended: One [file_id: 1].\nRecommended: Two [file_id: 2].");
}

TEST(MockLlm, Modes) {
    std::string prompt = std::string(kTaskSynthesize) + "\n";
    for (int i = 1; i <= 4; ++i) {
        prompt += "[file_id: " + std::to_string(i) + "] type: image | title: T" + std::to_string(i) + "\nx\n\n";
    }
    EXPECT_EQ(MockLlm(LlmMockMode::drop_half).complete(prompt),
              "Recommended: T1 [file_id: 1].\nRecommended: T3 [file_id: 3].");
    EXPECT_EQ(MockLlm(LlmMockMode::echo).complete(prompt), prompt);
    EXPECT_THROW(MockLlm(LlmMockMode::fail).complete(prompt), ProviderError);
    EXPECT_EQ(MockLlm().describe(), "mock-llm(citing_oracle)");
}

TEST(MockLlm, RouteReplyUnderstandsKorean) {
    const std::string prompt = std::string(kTaskRoute) + "\nquery: 야생동물 관련 오디오 파일\n";
    EXPECT_EQ(MockLlm().complete(prompt), R"(["audio"])");
}

TEST(MockEmbedder, ParallelForRepeatedTerms) {
    const MockEmbedder e;
    const auto a = e.embed("cat cat");
    const auto b = e.embed("cat");
    EXPECT_EQ(a.dims(), 256u);
    EXPECT_NEAR(cosine_similarity(a, b), 1.0, 1e-12);
    EXPECT_EQ(e.embed("wildlife photo"), e.embed("wildlife photo"));
    EXPECT_THROW(e.embed(""), ProviderError);
    EXPECT_EQ(e.describe(), "mock-embed(dims=256,seed=0)");
}

TEST(MockEmbedder, HashedBagOfWords) {
    const MockEmbedder e(16, 3);
    const auto v = e.embed("wildlife photo photo");
    std::vector<double> want(16, 0.0);
    want[e.bucket_of("wildlife")] += 1;
    want[e.bucket_of("photo")] += 2;
    double n = 0;
    for (double x : want) n += x * x;
    for (double& x : want) x /= std::sqrt(n);
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(v.values[i], want[i], 1e-15);
    EXPECT_EQ(e.bucket_of("photo"), fnv1a64("photo", 3) % 16);
}

TEST(ProviderConfig, Validation) {
    auto cfg = provider_config(ProviderKind::llm);
    EXPECT_NO_THROW(cfg.validate());
    cfg.backend = Backend::http;
    try {
        cfg.validate();
        FAIL() << "http backend without endpoint must be rejected";
    } catch (const ConfigError& e) {
        EXPECT_NE(e.field().find("endpoint"), std::string::npos);
    }
    cfg.endpoint = "http://localhost:1/v1";
    cfg.max_retries = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ProviderConfig, EnvOverride) {
    ::setenv("SMARTSEARCH_RERANK_ENDPOINT", "http://127.0.0.1:9/rerank", 1);
    const auto cfg = apply_env_overrides(provider_config(ProviderKind::rerank));
    ::unsetenv("SMARTSEARCH_RERANK_ENDPOINT");
    EXPECT_EQ(cfg.backend, Backend::http);
    EXPECT_EQ(cfg.endpoint.value_or(""), "http://127.0.0.1:9/rerank");
}

TEST(ProviderConfig, Parsing) {
    EXPECT_EQ(parse_backend("http"), Backend::http);
    EXPECT_EQ(parse_llm_mode("drop_half"), LlmMockMode::drop_half);
    EXPECT_THROW(parse_backend("grpc"), ConfigError);
}

TEST(ProviderSet, MocksArePure) {
    const auto a = make_mock_providers();
    const auto b = make_mock_providers();
    EXPECT_EQ(a.embedder->embed("lion"), b.embedder->embed("lion"));
    EXPECT_EQ(a.detector->detect("이미지"), b.detector->detect("이미지"));
    EXPECT_EQ(a.reranker->score("lion", {"lion roar"}), b.reranker->score("lion", {"lion roar"}));
}
