#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "smartsearch/errors.hpp"
#include "smartsearch/providers.hpp"

namespace smartsearch {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string provider_name(const ProviderConfig& cfg) { return std::string(to_string(cfg.kind)) + " provider"; }

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

// POSTs a JSON body with bounded retries and exponential backoff. The whole
// call never exceeds timeout * (max_retries + 1).
json post_json(const ProviderConfig& cfg, const json& body) {
    const auto endpoint = split_endpoint(*cfg.endpoint);
    const auto budget = cfg.timeout * (cfg.max_retries + 1);
    const auto deadline = Clock::now() + budget;
    httplib::Headers headers;
    if (cfg.auth_env_var) {
        if (const char* key = std::getenv(cfg.auth_env_var->c_str()); key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const std::string payload = body.dump();
    std::string last_error = "no attempt made";
    auto last_kind = ProviderError::Kind::timeout;
    auto backoff = std::chrono::milliseconds(100);
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        if (remaining.count() <= 0) break;
        const auto attempt_timeout = std::min(cfg.timeout, remaining);
        httplib::Client client(endpoint.origin);
        const auto secs = attempt_timeout.count() / 1000;
        const auto usecs = (attempt_timeout.count() % 1000) * 1000;
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        auto result = client.Post(endpoint.path, headers, payload, "application/json");
        if (!result) {
            last_error = provider_name(cfg) + " transport failure: " + httplib::to_string(result.error());
            last_kind = result.error() == httplib::Error::Read || result.error() == httplib::Error::Connection
                            ? ProviderError::Kind::timeout
                            : ProviderError::Kind::unavailable;
        } else if (result->status < 200 || result->status >= 300) {
            last_error = provider_name(cfg) + " returned HTTP " + std::to_string(result->status);
            last_kind = ProviderError::Kind::status;
            if (!retryable(result->status)) break;
        } else {
            try {
                return json::parse(result->body);
            } catch (const json::parse_error& e) {
                throw ProviderError(ProviderError::Kind::malformed,
                                    provider_name(cfg) + " returned malformed JSON: " + e.what());
            }
        }
        if (attempt == cfg.max_retries) break;
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        std::this_thread::sleep_for(std::max(std::chrono::milliseconds(0), std::min(backoff, left)));
        backoff *= 2;
    }
    throw ProviderError(last_kind, last_error);
}

template <typename F>
auto parse_or_throw(const ProviderConfig& cfg, F&& extract) {
    try {
        return extract();
    } catch (const json::exception& e) {
        throw ProviderError(ProviderError::Kind::malformed, provider_name(cfg) + " response has unexpected shape: " + e.what());
    }
}

std::string model_or_default(const ProviderConfig& cfg) { return cfg.model_id.value_or("default"); }

} // namespace

HttpLlm::HttpLlm(ProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::string HttpLlm::complete(const std::string& prompt) const {
    const json body = {
        {"model", model_or_default(cfg_)},
        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", 0},
    };
    const json reply = post_json(cfg_, body);
    return parse_or_throw(cfg_, [&] { return reply.at("choices").at(0).at("message").at("content").get<std::string>(); });
}

std::string HttpLlm::describe() const { return "http-llm(" + model_or_default(cfg_) + ")"; }

HttpEmbedder::HttpEmbedder(ProviderConfig cfg, std::size_t dims) : cfg_(std::move(cfg)), dims_(dims) { cfg_.validate(); }

EmbeddingVector HttpEmbedder::embed(std::string_view text) const {
    if (text.empty()) throw ProviderError(ProviderError::Kind::invalid_input, "empty input");
    const json body = {{"model", model_or_default(cfg_)}, {"input", std::string(text)}};
    const json reply = post_json(cfg_, body);
    EmbeddingVector vec;
    vec.values = parse_or_throw(cfg_, [&] { return reply.at("data").at(0).at("embedding").get<std::vector<double>>(); });
    if (vec.values.empty() || !std::all_of(vec.values.begin(), vec.values.end(), [](double v) { return std::isfinite(v); })) {
        throw ProviderError(ProviderError::Kind::malformed, "embedding provider returned an empty or non-finite vector");
    }
    std::size_t expected = 0;
    if (!dims_.compare_exchange_strong(expected, vec.dims()) && expected != vec.dims()) {
        throw ProviderError(ProviderError::Kind::malformed, "embedding provider changed dimensionality");
    }
    return vec;
}

std::size_t HttpEmbedder::dims() const {
    if (dims_.load() == 0) (void)embed("dimension probe");
    return dims_.load();
}

std::string HttpEmbedder::describe() const { return "http-embed(" + model_or_default(cfg_) + ")"; }

HttpTranslator::HttpTranslator(ProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::string HttpTranslator::translate(std::string_view text, std::string_view source, std::string_view target) const {
    if (source == target) return std::string(text);
    const json body = {
        {"q", std::string(text)}, {"source", std::string(source)}, {"target", std::string(target)}, {"format", "text"}};
    const json reply = post_json(cfg_, body);
    return parse_or_throw(cfg_, [&] { return reply.at("translatedText").get<std::string>(); });
}

HttpDetector::HttpDetector(ProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

LanguageTag HttpDetector::detect(std::string_view text) const {
    const json reply = post_json(cfg_, json{{"q", std::string(text)}});
    return parse_or_throw(cfg_, [&] {
        const json& best = reply.at(0);
        LanguageTag tag;
        tag.code = best.at("language").get<std::string>();
        tag.confidence = best.at("confidence").get<double>();
        // Some services report confidence as a percentage.
        if (tag.confidence > 1.0) tag.confidence /= 100.0;
        tag.confidence = std::clamp(tag.confidence, 0.0, 1.0);
        if (tag.code.size() != 2) {
            throw ProviderError(ProviderError::Kind::malformed, "detector returned non ISO-639-1 code '" + tag.code + "'");
        }
        return tag;
    });
}

HttpReranker::HttpReranker(ProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::vector<double> HttpReranker::score(std::string_view query, const std::vector<std::string>& texts) const {
    const json body = {{"model", model_or_default(cfg_)}, {"query", std::string(query)}, {"documents", texts}};
    const json reply = post_json(cfg_, body);
    return parse_or_throw(cfg_, [&] {
        std::vector<double> scores(texts.size(), 0.0);
        std::vector<bool> seen(texts.size(), false);
        for (const auto& item : reply.at("results")) {
            const auto index = item.at("index").get<std::size_t>();
            if (index >= texts.size()) throw ProviderError(ProviderError::Kind::malformed, "rerank index out of range");
            scores[index] = item.at("relevance_score").get<double>();
            seen[index] = true;
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
            throw ProviderError(ProviderError::Kind::malformed, "rerank response is missing documents");
        }
        return scores;
    });
}

} // namespace smartsearch
