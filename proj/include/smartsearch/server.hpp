#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "smartsearch/config.hpp"
#include "smartsearch/pipeline.hpp"

namespace smartsearch {

/// Parses a POST /v1/query body. Throws ConfigError naming the bad field.
struct QueryRequest {
    std::string query;
    QueryOverrides overrides;
};
QueryRequest parse_query_request(const nlohmann::json& body);

/// Response body of POST /v1/query.
nlohmann::json query_response_json(const PipelineResult& result, const CorpusStore& corpus,
                                   const std::string& url_template);

/// JSON-over-HTTP front end:
///   POST /v1/query   {query, alpha?, k?, ablation?: {translator?, router?, postprocessors?}}
///   GET  /healthz    200 once indices are loaded, 503 before
///   GET  /v1/config  configuration without credentials
///   GET  /ui/...     static files from server.ui_dir, when configured
class SearchServer {
public:
    SearchServer(AppConfig config, std::shared_ptr<Pipeline> pipeline);
    ~SearchServer();
    SearchServer(const SearchServer&) = delete;
    SearchServer& operator=(const SearchServer&) = delete;

    /// Binds host:port (port 0 picks a free port) and returns the bound port.
    /// Throws Error when the address cannot be bound.
    int bind();
    /// Serves until stop(); call bind() first.
    void run();
    /// Safe from any thread; run() returns after in-flight requests finish.
    void stop();
    int port() const noexcept { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = -1;
};

} // namespace smartsearch
