#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smartsearch/indexing.hpp"
#include "smartsearch/providers.hpp"
#include "smartsearch/retrieval.hpp"
#include "smartsearch/types.hpp"

namespace smartsearch {

enum class RouteMethod { llm_selector, rule_fallback };

std::string_view to_string(RouteMethod method) noexcept;

struct RouteDecision {
    std::vector<FileType> engines; // non-empty, in engine order, no duplicates
    RouteMethod method = RouteMethod::rule_fallback;
    std::string rationale;
};

/// Deterministic keyword router. Case-insensitive; selects all four engines
/// when the query names no file type.
RouteDecision rule_route(std::string_view query);

std::string build_route_prompt(std::string_view query);

/// Extracts a non-empty JSON array of engine names from an LLM reply.
std::optional<std::vector<FileType>> parse_selector_reply(std::string_view reply);

/// Asks the LLM selector first; any provider failure or unparseable reply
/// falls back to rule_route. Never throws. A null llm goes straight to the
/// rule router.
RouteDecision classify_query(std::string_view query_en, const LlmProvider* llm);

struct EngineResult {
    FileType file_type = FileType::image;
    std::vector<ScoredNode> nodes;
    std::optional<std::string> partial_answer;
    bool missing_index = false;
    std::size_t bm25_candidates = 0;
    std::size_t vector_candidates = 0;
};

/// Runs hybrid retrieval on each selected engine (at most four concurrently);
/// results come back in engine order. Engines without an index yield an empty
/// result flagged missing_index, and a note is appended to `notes`.
std::vector<EngineResult> route_and_query(std::string_view query_en, const RouteDecision& decision,
                                          const TypedIndexSet& indices, const RetrievalParams& params,
                                          const EmbeddingVector& query_vector, std::vector<std::string>* notes = nullptr);
std::vector<EngineResult> route_and_query(std::string_view query_en, const RouteDecision& decision,
                                          const TypedIndexSet& indices, const RetrievalParams& params,
                                          const EmbeddingProvider& embedder, std::vector<std::string>* notes = nullptr);

/// Score-level merge of per-engine results: concatenate, sort by hybrid score
/// (ties by chunk_id), keep the first final_k.
std::vector<ScoredNode> summarize_results(const std::vector<EngineResult>& results, std::size_t final_k);

} // namespace smartsearch
