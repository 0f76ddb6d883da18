#include "smartsearch/routing.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "smartsearch/errors.hpp"
#include "smartsearch/parallel.hpp"
#include "smartsearch/text.hpp"

namespace smartsearch {
namespace {

struct Keywords {
    FileType type;
    std::set<std::string> words;
};

const std::vector<Keywords>& keyword_table() {
    static const std::vector<Keywords> table = {
        {FileType::image, {"image", "images", "photo", "photos", "picture", "pictures"}},
        {FileType::audio, {"audio", "audios", "sound", "sounds", "recording", "recordings"}},
        {FileType::video, {"video", "videos", "clip", "clips", "footage", "footages"}},
        {FileType::document, {"document", "documents", "text", "texts", "report", "reports"}},
    };
    return table;
}

std::vector<FileType> in_engine_order(const std::set<FileType>& types) {
    std::vector<FileType> out;
    for (const auto type : kAllFileTypes) {
        if (types.count(type)) out.push_back(type);
    }
    return out;
}

std::string engine_list(const std::vector<FileType>& engines) {
    std::vector<std::string> names;
    for (const auto type : engines) names.emplace_back(to_string(type));
    return join(names, ", ");
}

} // namespace

std::string_view to_string(RouteMethod method) noexcept {
    return method == RouteMethod::llm_selector ? "llm_selector" : "rule_fallback";
}

RouteDecision rule_route(std::string_view query) {
    const auto tokens = tokenize(query);
    std::set<FileType> picked;
    std::vector<std::string> matched;
    for (const auto& token : tokens) {
        for (const auto& entry : keyword_table()) {
            if (entry.words.count(token)) {
                picked.insert(entry.type);
                matched.push_back(token);
            }
        }
    }
    RouteDecision decision;
    decision.method = RouteMethod::rule_fallback;
    if (picked.empty()) {
        decision.engines.assign(kAllFileTypes.begin(), kAllFileTypes.end());
        decision.rationale = "no file-type keyword in query; querying all engines";
    } else {
        decision.engines = in_engine_order(picked);
        decision.rationale = "keywords [" + join(matched, ", ") + "] -> " + engine_list(decision.engines);
    }
    return decision;
}

std::string build_route_prompt(std::string_view query) {
    std::ostringstream prompt;
    prompt << kTaskRoute << '\n'
           << "You route archive search queries to query engines. Available engines:\n"
           << "image: photographs, pictures and other still images\n"
           << "audio: sound recordings, music, speech and podcasts\n"
           << "video: video clips, films and footage\n"
           << "document: text documents, reports and articles\n"
           << "Pick every engine whose files could answer the query. If the query does not name a file type, "
              "pick all engines. Reply with a JSON array of engine names and nothing else.\n"
           << "query: " << query << '\n';
    return prompt.str();
}

std::optional<std::vector<FileType>> parse_selector_reply(std::string_view reply) {
    const auto open = reply.find('[');
    if (open == std::string_view::npos) return std::nullopt;
    const auto close = reply.find(']', open);
    if (close == std::string_view::npos) return std::nullopt;
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(reply.substr(open, close - open + 1));
    } catch (const nlohmann::json::parse_error&) {
        return std::nullopt;
    }
    if (!parsed.is_array() || parsed.empty()) return std::nullopt;
    std::set<FileType> picked;
    for (const auto& item : parsed) {
        if (!item.is_string()) return std::nullopt;
        const auto type = try_parse_file_type(to_lower_ascii(trim(item.get<std::string>())));
        if (!type) return std::nullopt;
        picked.insert(*type);
    }
    return in_engine_order(picked);
}

RouteDecision classify_query(std::string_view query_en, const LlmProvider* llm) {
    if (llm == nullptr) return rule_route(query_en);
    std::string failure;
    try {
        const auto reply = llm->complete(build_route_prompt(query_en));
        if (auto engines = parse_selector_reply(reply)) {
            RouteDecision decision;
            decision.engines = std::move(*engines);
            decision.method = RouteMethod::llm_selector;
            decision.rationale = "selector chose " + engine_list(decision.engines);
            return decision;
        }
        failure = "selector reply was not a JSON array of engines";
    } catch (const std::exception& e) {
        failure = std::string("selector failed: ") + e.what();
    }
    auto decision = rule_route(query_en);
    decision.rationale = failure + "; " + decision.rationale;
    return decision;
}

std::vector<EngineResult> route_and_query(std::string_view query_en, const RouteDecision& decision,
                                          const TypedIndexSet& indices, const RetrievalParams& params,
                                          const EmbeddingVector& query_vector, std::vector<std::string>* notes) {
    const auto engines = in_engine_order(std::set<FileType>(decision.engines.begin(), decision.engines.end()));
    std::vector<EngineResult> results(engines.size());
    parallel_for(engines.size(), 4, [&](std::size_t i) {
        auto& result = results[i];
        result.file_type = engines[i];
        const IndexPair* pair = indices.find(engines[i]);
        if (pair == nullptr) {
            result.missing_index = true;
            return;
        }
        auto hybrid = hybrid_retrieve(query_en, query_vector, *pair, params);
        result.nodes = std::move(hybrid.nodes);
        result.bm25_candidates = hybrid.bm25_candidates;
        result.vector_candidates = hybrid.vector_candidates;
    });
    if (notes != nullptr) {
        for (const auto& result : results) {
            if (result.missing_index) {
                notes->push_back("MissingIndex(" + std::string(to_string(result.file_type)) + "): engine skipped");
            }
        }
    }
    return results;
}

std::vector<EngineResult> route_and_query(std::string_view query_en, const RouteDecision& decision,
                                          const TypedIndexSet& indices, const RetrievalParams& params,
                                          const EmbeddingProvider& embedder, std::vector<std::string>* notes) {
    return route_and_query(query_en, decision, indices, params, embedder.embed(query_en), notes);
}

std::vector<ScoredNode> summarize_results(const std::vector<EngineResult>& results, std::size_t final_k) {
    std::vector<ScoredNode> merged;
    for (const auto& result : results) merged.insert(merged.end(), result.nodes.begin(), result.nodes.end());
    sort_by_hybrid(merged);
    if (merged.size() > final_k) merged.resize(final_k);
    return merged;
}

} // namespace smartsearch
