#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smartsearch/indexing.hpp"
#include "smartsearch/pipeline.hpp"
#include "smartsearch/providers.hpp"

namespace smartsearch {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path ui_dir;                // served under /ui/ when set
    std::string url_template = "/files/{file_id}"; // link target for cited IDs
};

struct EvalConfig {
    std::size_t workers = 4; // concurrent queries
    std::size_t per_cell = 3;
    std::uint64_t seed = 7;
};

/// Whole-application configuration, read from a JSON file. Every section and
/// field is optional; see README.md for the schema. Relative paths resolve
/// against the directory holding the config file.
struct AppConfig {
    std::filesystem::path corpus_path = "corpus.jsonl";
    std::filesystem::path index_dir = "index";
    std::vector<std::string> topics; // empty = derive from corpus
    bool strict_corpus = true;
    IndexBuildParams indexing;
    PipelineConfig pipeline;
    std::optional<std::filesystem::path> prompt_path;
    ProviderSetConfig providers;
    ServerConfig server;
    EvalConfig eval;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Throws ConfigError (field path such as "retrieval.alpha") on unknown keys,
/// wrong types or invalid values. `base_dir` anchors relative paths.
AppConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
AppConfig load_config(const std::filesystem::path& path);
/// Defaults with environment overrides applied.
AppConfig default_config();

/// Config as JSON without credentials: endpoint user-info is masked and only
/// the names of API-key variables appear.
nlohmann::json redacted_config(const AppConfig& cfg);

} // namespace smartsearch
