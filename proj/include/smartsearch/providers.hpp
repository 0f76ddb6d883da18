#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smartsearch/types.hpp"

namespace smartsearch {

// Prompt headers. Every prompt the pipeline sends starts with one of these so
// that mock backends can tell the tasks apart; HTTP backends ignore them.
inline constexpr std::string_view kTaskDescribe = "TASK: describe_file";
inline constexpr std::string_view kTaskRoute = "TASK: route_query";
inline constexpr std::string_view kTaskSynthesize = "TASK: synthesize_answer";

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    /// Throws ProviderError.
    virtual std::string complete(const std::string& prompt) const = 0;
    virtual std::string describe() const = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dims() const = 0;
    /// Identifies the embedding space; persisted with indices.
    virtual std::string describe() const = 0;
};

class TranslationProvider {
public:
    virtual ~TranslationProvider() = default;
    virtual std::string translate(std::string_view text, std::string_view source, std::string_view target) const = 0;
};

class DetectionProvider {
public:
    virtual ~DetectionProvider() = default;
    virtual LanguageTag detect(std::string_view text) const = 0;
};

class RerankProvider {
public:
    virtual ~RerankProvider() = default;
    /// One relevance score per text, in input order.
    virtual std::vector<double> score(std::string_view query, const std::vector<std::string>& texts) const = 0;
};

// ---------------------------------------------------------------------------
// Configuration

enum class ProviderKind { llm, embedding, translation, detection, rerank };
enum class Backend { mock, http };
enum class LlmMockMode { citing_oracle, echo, drop_half, fail };

std::string_view to_string(ProviderKind kind) noexcept;
std::string_view to_string(Backend backend) noexcept;
std::string_view to_string(LlmMockMode mode) noexcept;
Backend parse_backend(std::string_view value);
LlmMockMode parse_llm_mode(std::string_view value);

struct ProviderConfig {
    ProviderKind kind = ProviderKind::llm;
    Backend backend = Backend::mock;
    std::optional<std::string> endpoint;
    std::optional<std::string> auth_env_var;
    std::optional<std::string> model_id;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 2;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Reads SMARTSEARCH_<KIND>_ENDPOINT / _MODEL and switches to the http
/// backend when an endpoint is supplied through the environment.
ProviderConfig apply_env_overrides(ProviderConfig cfg);

struct MockBehavior {
    LlmMockMode llm_mode = LlmMockMode::citing_oracle;
    std::size_t embed_dims = 256;
    std::uint64_t seed = 0;

    void validate() const;
};

inline ProviderConfig provider_config(ProviderKind kind) {
    ProviderConfig cfg;
    cfg.kind = kind;
    return cfg;
}

struct ProviderSetConfig {
    ProviderConfig llm = provider_config(ProviderKind::llm);
    ProviderConfig embedding = provider_config(ProviderKind::embedding);
    ProviderConfig translation = provider_config(ProviderKind::translation);
    ProviderConfig detection = provider_config(ProviderKind::detection);
    ProviderConfig rerank = provider_config(ProviderKind::rerank);
    MockBehavior mock;
};

struct ProviderSet {
    std::shared_ptr<const LlmProvider> llm;
    std::shared_ptr<const EmbeddingProvider> embedder;
    std::shared_ptr<const TranslationProvider> translator;
    std::shared_ptr<const DetectionProvider> detector;
    std::shared_ptr<const RerankProvider> reranker;
};

std::shared_ptr<const LlmProvider> make_llm(const ProviderConfig& cfg, const MockBehavior& mock);
ProviderSet make_providers(const ProviderSetConfig& cfg);
/// All five providers backed by mocks.
ProviderSet make_mock_providers(const MockBehavior& mock = {});

// ---------------------------------------------------------------------------
// Deterministic mocks

/// Stand-in LLM. Its replies are pure functions of the prompt and mode:
///  - describe prompts get a templated one-line description,
///  - route prompts get a JSON array of engines found by keyword (English and
///    Korean file-type words), or all engines when none is named,
///  - any other prompt is treated as a synthesis request: citing_oracle emits
///    `Recommended: <title> [file_id: <id>].` per distinct file listed in the
///    prompt, drop_half does the same for odd-ranked files only.
/// echo returns the prompt verbatim and fail always throws.
class MockLlm final : public LlmProvider {
public:
    explicit MockLlm(LlmMockMode mode = LlmMockMode::citing_oracle) : mode_(mode) {}
    std::string complete(const std::string& prompt) const override;
    std::string describe() const override;

    LlmMockMode mode() const noexcept { return mode_; }

private:
    LlmMockMode mode_;
};

/// Seeded hashed bag-of-words: each token is hashed to one of `dims` buckets,
/// term frequencies are accumulated and the result is L2-normalised.
class MockEmbedder final : public EmbeddingProvider {
public:
    explicit MockEmbedder(std::size_t dims = 256, std::uint64_t seed = 0);
    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dims() const override { return dims_; }
    std::string describe() const override;

    std::size_t bucket_of(std::string_view term) const;

private:
    std::size_t dims_;
    std::uint64_t seed_;
};

/// English/Korean detector: any Hangul makes the text Korean; otherwise Latin
/// text is English with a confidence driven by common English function words.
class MockDetector final : public DetectionProvider {
public:
    LanguageTag detect(std::string_view text) const override;
};

/// Dictionary translator over the closed benchmark vocabulary (query
/// templates, file-type words, topics, and the fixed response phrases).
/// Whole query templates translate losslessly in both directions; anything
/// else is translated phrase by phrase with unknown words passed through.
class MockTranslator final : public TranslationProvider {
public:
    std::string translate(std::string_view text, std::string_view source, std::string_view target) const override;

    static std::string to_korean(std::string_view english);
    static std::string to_english(std::string_view korean);
};

/// Fraction of distinct query terms that also occur in the text.
class MockReranker final : public RerankProvider {
public:
    std::vector<double> score(std::string_view query, const std::vector<std::string>& texts) const override;
};

/// Korean rendering of a benchmark topic or file-type word, if the mock
/// dictionary knows it.
std::optional<std::string> mock_korean_term(std::string_view english);

// ---------------------------------------------------------------------------
// HTTP backends (chat-completion style JSON APIs)

class HttpLlm final : public LlmProvider {
public:
    explicit HttpLlm(ProviderConfig cfg);
    std::string complete(const std::string& prompt) const override;
    std::string describe() const override;

private:
    ProviderConfig cfg_;
};

class HttpEmbedder final : public EmbeddingProvider {
public:
    /// `dims` is probed lazily from the first response when zero.
    explicit HttpEmbedder(ProviderConfig cfg, std::size_t dims = 0);
    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dims() const override;
    std::string describe() const override;

private:
    ProviderConfig cfg_;
    mutable std::atomic<std::size_t> dims_;
};

class HttpTranslator final : public TranslationProvider {
public:
    explicit HttpTranslator(ProviderConfig cfg);
    std::string translate(std::string_view text, std::string_view source, std::string_view target) const override;

private:
    ProviderConfig cfg_;
};

class HttpDetector final : public DetectionProvider {
public:
    explicit HttpDetector(ProviderConfig cfg);
    LanguageTag detect(std::string_view text) const override;

private:
    ProviderConfig cfg_;
};

class HttpReranker final : public RerankProvider {
public:
    explicit HttpReranker(ProviderConfig cfg);
    std::vector<double> score(std::string_view query, const std::vector<std::string>& texts) const override;

private:
    ProviderConfig cfg_;
};

} // namespace smartsearch
