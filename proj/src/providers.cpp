#include <cstdlib>

#include "smartsearch/errors.hpp"
#include "smartsearch/providers.hpp"

namespace smartsearch {
namespace {

std::string env_prefix(ProviderKind kind) {
    std::string name(to_string(kind));
    for (auto& c : name) c = static_cast<char>(c - 'a' + 'A');
    return "SMARTSEARCH_" + name + "_";
}

std::optional<std::string> getenv_nonempty(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
}

} // namespace

std::string_view to_string(ProviderKind kind) noexcept {
    switch (kind) {
    case ProviderKind::llm: return "llm";
    case ProviderKind::embedding: return "embedding";
    case ProviderKind::translation: return "translation";
    case ProviderKind::detection: return "detection";
    case ProviderKind::rerank: return "rerank";
    }
    return "llm";
}

std::string_view to_string(Backend backend) noexcept { return backend == Backend::http ? "http" : "mock"; }

std::string_view to_string(LlmMockMode mode) noexcept {
    switch (mode) {
    case LlmMockMode::citing_oracle: return "citing_oracle";
    case LlmMockMode::echo: return "echo";
    case LlmMockMode::drop_half: return "drop_half";
    case LlmMockMode::fail: return "fail";
    }
    return "citing_oracle";
}

Backend parse_backend(std::string_view value) {
    if (value == "mock") return Backend::mock;
    if (value == "http") return Backend::http;
    throw ConfigError("backend", "expected mock or http, got '" + std::string(value) + "'");
}

LlmMockMode parse_llm_mode(std::string_view value) {
    for (const auto mode : {LlmMockMode::citing_oracle, LlmMockMode::echo, LlmMockMode::drop_half, LlmMockMode::fail}) {
        if (to_string(mode) == value) return mode;
    }
    throw ConfigError("mock.llm_mode", "unknown mode '" + std::string(value) + "'");
}

void ProviderConfig::validate() const {
    const std::string prefix = "providers." + std::string(to_string(kind)) + ".";
    if (backend == Backend::http && (!endpoint || endpoint->empty())) {
        throw ConfigError(prefix + "endpoint", "required for the http backend");
    }
    if (endpoint && !(endpoint->starts_with("http://") || endpoint->starts_with("https://"))) {
        throw ConfigError(prefix + "endpoint", "must start with http:// or https://");
    }
    if (timeout.count() <= 0) throw ConfigError(prefix + "timeout_ms", "must be positive");
    if (max_retries < 0 || max_retries > 10) throw ConfigError(prefix + "max_retries", "must be within [0, 10]");
}

ProviderConfig apply_env_overrides(ProviderConfig cfg) {
    const auto prefix = env_prefix(cfg.kind);
    if (auto endpoint = getenv_nonempty(prefix + "ENDPOINT")) {
        cfg.endpoint = *endpoint;
        cfg.backend = Backend::http;
    }
    if (auto model = getenv_nonempty(prefix + "MODEL")) cfg.model_id = *model;
    if (!cfg.auth_env_var && getenv_nonempty(prefix + "API_KEY")) cfg.auth_env_var = prefix + "API_KEY";
    return cfg;
}

void MockBehavior::validate() const {
    if (embed_dims < 8) throw ConfigError("mock.embed_dims", "must be at least 8");
}

std::shared_ptr<const LlmProvider> make_llm(const ProviderConfig& cfg, const MockBehavior& mock) {
    cfg.validate();
    if (cfg.backend == Backend::http) return std::make_shared<HttpLlm>(cfg);
    return std::make_shared<MockLlm>(mock.llm_mode);
}

ProviderSet make_providers(const ProviderSetConfig& cfg) {
    cfg.mock.validate();
    for (const auto* p : {&cfg.llm, &cfg.embedding, &cfg.translation, &cfg.detection, &cfg.rerank}) p->validate();
    ProviderSet set;
    set.llm = make_llm(cfg.llm, cfg.mock);
    if (cfg.embedding.backend == Backend::http) {
        set.embedder = std::make_shared<HttpEmbedder>(cfg.embedding);
    } else {
        set.embedder = std::make_shared<MockEmbedder>(cfg.mock.embed_dims, cfg.mock.seed);
    }
    if (cfg.translation.backend == Backend::http) {
        set.translator = std::make_shared<HttpTranslator>(cfg.translation);
    } else {
        set.translator = std::make_shared<MockTranslator>();
    }
    if (cfg.detection.backend == Backend::http) {
        set.detector = std::make_shared<HttpDetector>(cfg.detection);
    } else {
        set.detector = std::make_shared<MockDetector>();
    }
    if (cfg.rerank.backend == Backend::http) {
        set.reranker = std::make_shared<HttpReranker>(cfg.rerank);
    } else {
        set.reranker = std::make_shared<MockReranker>();
    }
    return set;
}

ProviderSet make_mock_providers(const MockBehavior& mock) {
    ProviderSetConfig cfg;
    cfg.mock = mock;
    return make_providers(cfg);
}

} // namespace smartsearch
