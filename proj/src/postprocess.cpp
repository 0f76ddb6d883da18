#include "smartsearch/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include "smartsearch/errors.hpp"

namespace smartsearch {

void PostProcessConfig::validate() const {
    if (rerank_top_n < 1) throw ConfigError("rerank_top_n", "must be at least 1");
}

RerankOutcome rerank(std::string_view query_en, const std::vector<ScoredNode>& nodes,
                     const std::vector<std::string>& texts, const RerankProvider& reranker, std::size_t top_n,
                     std::vector<std::string>* notes) {
    if (nodes.empty()) return {nodes, false};
    if (texts.size() != nodes.size()) throw Error("rerank: one text per node required");
    std::vector<double> scores;
    try {
        scores = reranker.score(query_en, texts);
        if (scores.size() != nodes.size()) throw ProviderError(ProviderError::Kind::malformed, "reranker returned wrong score count");
        if (!std::all_of(scores.begin(), scores.end(), [](double s) { return std::isfinite(s); })) {
            throw ProviderError(ProviderError::Kind::malformed, "reranker returned non-finite scores");
        }
    } catch (const ProviderError& e) {
        if (notes != nullptr) notes->push_back(std::string("rerank skipped: ") + e.what());
        return {nodes, true};
    }
    RerankOutcome out;
    out.nodes = nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) out.nodes[i].rerank_score = scores[i];
    std::sort(out.nodes.begin(), out.nodes.end(), [](const ScoredNode& a, const ScoredNode& b) {
        if (*a.rerank_score != *b.rerank_score) return *a.rerank_score > *b.rerank_score;
        return a.chunk_id < b.chunk_id;
    });
    if (out.nodes.size() > top_n) out.nodes.resize(top_n);
    return out;
}

std::vector<ScoredNode> long_context_reorder(const std::vector<ScoredNode>& nodes) {
    std::vector<ScoredNode> out(nodes.size());
    std::size_t front = 0;
    std::size_t back = nodes.size();
    for (std::size_t rank = 0; rank < nodes.size(); ++rank) {
        if (rank % 2 == 0) {
            out[front++] = nodes[rank];
        } else {
            out[--back] = nodes[rank];
        }
    }
    return out;
}

} // namespace smartsearch
