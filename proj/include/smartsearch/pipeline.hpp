#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smartsearch/corpus.hpp"
#include "smartsearch/indexing.hpp"
#include "smartsearch/language.hpp"
#include "smartsearch/postprocess.hpp"
#include "smartsearch/providers.hpp"
#include "smartsearch/retrieval.hpp"
#include "smartsearch/routing.hpp"
#include "smartsearch/synthesis.hpp"

namespace smartsearch {

/// Which optional stages run. Disabling the translator skips both query and
/// response translation; disabling the router sends every query to the merged
/// index; disabling postprocessors skips rerank and reorder.
struct AblationFlags {
    bool translator = true;
    bool router = true;
    bool postprocessors = true;

    bool operator==(const AblationFlags&) const = default;
};

struct PipelineConfig {
    RetrievalParams retrieval;
    PostProcessConfig postprocess;
    AblationFlags ablation;
    SynthesisPrompt prompt = SynthesisPrompt::default_prompt();

    void validate() const; // throws ConfigError
};

/// Per-request overrides; unset fields keep the pipeline defaults.
struct QueryOverrides {
    std::optional<double> alpha;
    std::optional<std::size_t> k;
    std::optional<bool> translator;
    std::optional<bool> router;
    std::optional<bool> postprocessors;
};

inline constexpr std::array<std::string_view, 6> kStageOrder = {"translate",   "route",      "retrieve",
                                                                "postprocess", "synthesize", "backtranslate"};

struct StageRecord {
    std::string name;
    bool skipped = false;
    double ms = 0.0;
    std::vector<std::string> node_ids; // chunk IDs leaving the stage, where it produces nodes
};

struct EngineCandidates {
    std::string engine; // file type, or "merged"
    std::size_t bm25 = 0;
    std::size_t vector = 0;
    bool missing_index = false;
};

struct QueryTrace {
    LanguageTag language;
    std::string query_en;
    bool translation_degraded = false;
    bool response_translation_degraded = false;
    RouteDecision route;
    bool merged_index = false;
    std::vector<EngineCandidates> candidates;
    std::vector<StageRecord> stages; // always the six stages of kStageOrder
    std::vector<std::string> notes;
    double alpha = 0.0;
    std::size_t final_k = 0;
    AblationFlags ablation;
    double total_ms = 0.0;
};

nlohmann::json trace_to_json(const QueryTrace& trace);

struct PipelineResult {
    SynthesizedResponse response;
    QueryTrace trace;
};

/// The query path: translate, route, retrieve, postprocess, synthesize,
/// backtranslate. Safe to call concurrently; the loaded corpus and indices are
/// shared read-only and can be swapped while requests run.
class Pipeline {
public:
    Pipeline(PipelineConfig config, ProviderSet providers);

    void load(std::shared_ptr<const CorpusStore> corpus, std::shared_ptr<const TypedIndexSet> indices);
    bool ready() const;

    /// Throws IndexNotReady before load(), ConfigError for invalid overrides.
    /// Provider failures never throw; they degrade and set flags.
    PipelineResult query(std::string_view raw_query, const QueryOverrides& overrides = {}) const;

    const PipelineConfig& config() const noexcept { return config_; }
    const ProviderSet& providers() const noexcept { return providers_; }
    std::shared_ptr<const CorpusStore> corpus() const;
    std::shared_ptr<const TypedIndexSet> indices() const;

private:
    PipelineConfig config_;
    ProviderSet providers_;
    mutable std::mutex mutex_;
    std::shared_ptr<const CorpusStore> corpus_;
    std::shared_ptr<const TypedIndexSet> indices_;
};

} // namespace smartsearch
