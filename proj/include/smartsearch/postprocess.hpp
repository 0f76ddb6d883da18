#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "smartsearch/providers.hpp"
#include "smartsearch/types.hpp"

namespace smartsearch {

struct PostProcessConfig {
    bool rerank_enabled = true;
    std::size_t rerank_top_n = 5;
    bool reorder_enabled = true;

    void validate() const; // throws ConfigError
};

struct RerankOutcome {
    std::vector<ScoredNode> nodes;
    bool degraded = false;
};

/// Scores each (query, chunk text) pair, sorts by rerank_score descending
/// (ties by chunk_id) and keeps top_n. `texts[i]` is the text of `nodes[i]`.
/// On provider failure the input comes back unchanged with degraded set.
RerankOutcome rerank(std::string_view query_en, const std::vector<ScoredNode>& nodes,
                     const std::vector<std::string>& texts, const RerankProvider& reranker, std::size_t top_n,
                     std::vector<std::string>* notes = nullptr);

/// Places the most relevant nodes at the edges: input ranks 1, 2, 3, 4, ...
/// land at positions first, last, second, second-to-last, and so on inward.
/// The input must already be in relevance order.
std::vector<ScoredNode> long_context_reorder(const std::vector<ScoredNode>& nodes);

} // namespace smartsearch
