#pragma once

#include <string_view>
#include <vector>

#include "smartsearch/indexing.hpp"
#include "smartsearch/providers.hpp"
#include "smartsearch/types.hpp"

namespace smartsearch {

enum class Branch { bm25, vector };

struct RetrievalParams {
    double alpha = 0.8; // 0 = lexical only, 1 = dense only
    std::size_t top_k_per_branch = 10;
    std::size_t final_k = 10;

    void validate() const; // throws ConfigError
};

/// Min-max normalisation of one branch over a candidate pool.
///
/// Nodes carrying the branch score map to (s - min) / (max - min). Nodes
/// without it were not returned by that branch; they are pinned to 0 and
/// take part in the pool as a floor value min(0, lowest present score), so
/// that they never outrank a node the branch did return. If max == min every
/// scored node gets 1.0. Throws NoScoresForBranch when no node has the score.
std::vector<ScoredNode> normalize_scores(std::vector<ScoredNode> nodes, Branch branch);

/// alpha * vector_norm + (1 - alpha) * bm25_norm, clamped to [0, 1] against
/// rounding.
double hybrid_score(double vector_norm, double bm25_norm, double alpha);

/// Sort by hybrid_score descending, chunk_id ascending.
void sort_by_hybrid(std::vector<ScoredNode>& nodes);

/// Union of two branch result lists fused with the alpha weighting and cut to
/// params.final_k. A branch with no hits contributes 0 to every node.
std::vector<ScoredNode> fuse_branches(const std::vector<ScoredNode>& bm25_hits, const std::vector<ScoredNode>& vector_hits,
                                      const RetrievalParams& params);

struct HybridResult {
    std::vector<ScoredNode> nodes;
    std::size_t bm25_candidates = 0;
    std::size_t vector_candidates = 0;
    std::size_t union_size = 0;
};

HybridResult hybrid_retrieve(std::string_view query, const EmbeddingVector& query_vector, const IndexPair& indices,
                             const RetrievalParams& params);
HybridResult hybrid_retrieve(std::string_view query, const IndexPair& indices, const RetrievalParams& params,
                             const EmbeddingProvider& embedder);

} // namespace smartsearch
