#include "smartsearch/retrieval.hpp"

#include <algorithm>
#include <map>

#include "smartsearch/errors.hpp"

namespace smartsearch {
namespace {

std::optional<double>& raw(ScoredNode& node, Branch branch) {
    return branch == Branch::bm25 ? node.bm25_score : node.vector_score;
}

std::optional<double>& norm(ScoredNode& node, Branch branch) {
    return branch == Branch::bm25 ? node.bm25_norm : node.vector_norm;
}

} // namespace

void RetrievalParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must be within [0, 1]");
    if (top_k_per_branch < 1) throw ConfigError("top_k_per_branch", "must be at least 1");
    if (final_k < 1) throw ConfigError("final_k", "must be at least 1");
}

std::vector<ScoredNode> normalize_scores(std::vector<ScoredNode> nodes, Branch branch) {
    bool any_present = false;
    bool any_absent = false;
    double lo = 0.0;
    double hi = 0.0;
    for (auto& node : nodes) {
        const auto& s = raw(node, branch);
        if (!s) {
            any_absent = true;
            continue;
        }
        if (!any_present) {
            lo = hi = *s;
            any_present = true;
        } else {
            lo = std::min(lo, *s);
            hi = std::max(hi, *s);
        }
    }
    if (!any_present) throw NoScoresForBranch(branch == Branch::bm25 ? "bm25" : "vector");
    if (any_absent) lo = std::min(lo, 0.0);
    for (auto& node : nodes) {
        const auto& s = raw(node, branch);
        if (!s) {
            norm(node, branch) = 0.0;
        } else if (hi == lo) {
            norm(node, branch) = 1.0;
        } else {
            norm(node, branch) = std::clamp((*s - lo) / (hi - lo), 0.0, 1.0);
        }
    }
    return nodes;
}

double hybrid_score(double vector_norm, double bm25_norm, double alpha) {
    return std::clamp(alpha * vector_norm + (1.0 - alpha) * bm25_norm, 0.0, 1.0);
}

void sort_by_hybrid(std::vector<ScoredNode>& nodes) {
    std::sort(nodes.begin(), nodes.end(), [](const ScoredNode& a, const ScoredNode& b) {
        const double sa = a.hybrid_score.value_or(0.0);
        const double sb = b.hybrid_score.value_or(0.0);
        if (sa != sb) return sa > sb;
        return a.chunk_id < b.chunk_id;
    });
}

std::vector<ScoredNode> fuse_branches(const std::vector<ScoredNode>& bm25_hits, const std::vector<ScoredNode>& vector_hits,
                                      const RetrievalParams& params) {
    params.validate();
    std::map<std::string, ScoredNode> pool;
    for (const auto& hit : bm25_hits) {
        auto& node = pool[hit.chunk_id];
        node.chunk_id = hit.chunk_id;
        node.file_id = hit.file_id;
        node.bm25_score = hit.bm25_score;
    }
    for (const auto& hit : vector_hits) {
        auto& node = pool[hit.chunk_id];
        node.chunk_id = hit.chunk_id;
        node.file_id = hit.file_id;
        node.vector_score = hit.vector_score;
    }
    std::vector<ScoredNode> nodes;
    nodes.reserve(pool.size());
    for (auto& [id, node] : pool) nodes.push_back(std::move(node));
    if (nodes.empty()) return nodes;

    for (const auto branch : {Branch::bm25, Branch::vector}) {
        const bool has_scores = std::any_of(nodes.begin(), nodes.end(), [&](ScoredNode& n) { return raw(n, branch).has_value(); });
        if (has_scores) {
            nodes = normalize_scores(std::move(nodes), branch);
        } else {
            for (auto& n : nodes) norm(n, branch) = 0.0;
        }
    }
    for (auto& node : nodes) node.hybrid_score = hybrid_score(*node.vector_norm, *node.bm25_norm, params.alpha);
    sort_by_hybrid(nodes);
    if (nodes.size() > params.final_k) nodes.resize(params.final_k);
    return nodes;
}

HybridResult hybrid_retrieve(std::string_view query, const EmbeddingVector& query_vector, const IndexPair& indices,
                             const RetrievalParams& params) {
    params.validate();
    const auto bm25_hits = indices.bm25.search(query, params.top_k_per_branch);
    const auto vector_hits = indices.vectors.search(query_vector, params.top_k_per_branch);
    HybridResult result;
    result.bm25_candidates = bm25_hits.size();
    result.vector_candidates = vector_hits.size();
    std::vector<std::string> ids;
    for (const auto& n : bm25_hits) ids.push_back(n.chunk_id);
    for (const auto& n : vector_hits) ids.push_back(n.chunk_id);
    std::sort(ids.begin(), ids.end());
    result.union_size = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
    result.nodes = fuse_branches(bm25_hits, vector_hits, params);
    return result;
}

HybridResult hybrid_retrieve(std::string_view query, const IndexPair& indices, const RetrievalParams& params,
                             const EmbeddingProvider& embedder) {
    return hybrid_retrieve(query, embedder.embed(query), indices, params);
}

} // namespace smartsearch
