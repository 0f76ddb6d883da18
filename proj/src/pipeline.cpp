#include "smartsearch/pipeline.hpp"

#include <chrono>
#include <set>

#include "smartsearch/errors.hpp"

namespace smartsearch {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<std::string> chunk_ids(const std::vector<ScoredNode>& nodes) {
    std::vector<std::string> ids;
    ids.reserve(nodes.size());
    for (const auto& n : nodes) ids.push_back(n.chunk_id);
    return ids;
}

} // namespace

void PipelineConfig::validate() const {
    retrieval.validate();
    postprocess.validate();
    prompt.validate();
}

nlohmann::json trace_to_json(const QueryTrace& trace) {
    nlohmann::ordered_json j;
    j["language"] = {{"code", trace.language.code}, {"confidence", trace.language.confidence}};
    j["query_en"] = trace.query_en;
    j["translation_degraded"] = trace.translation_degraded;
    j["response_translation_degraded"] = trace.response_translation_degraded;
    std::vector<std::string> engines;
    for (const auto type : trace.route.engines) engines.emplace_back(to_string(type));
    j["route"] = {{"engines", engines},
                  {"method", std::string(to_string(trace.route.method))},
                  {"rationale", trace.route.rationale},
                  {"merged_index", trace.merged_index}};
    auto candidates = nlohmann::ordered_json::array();
    for (const auto& c : trace.candidates) {
        candidates.push_back({{"engine", c.engine}, {"bm25", c.bm25}, {"vector", c.vector}, {"missing_index", c.missing_index}});
    }
    j["candidates"] = candidates;
    auto stages = nlohmann::ordered_json::array();
    for (const auto& s : trace.stages) {
        nlohmann::ordered_json stage = {{"name", s.name}, {"skipped", s.skipped}, {"ms", s.ms}};
        stage["node_ids"] = s.node_ids;
        stages.push_back(stage);
    }
    j["stages"] = stages;
    j["notes"] = trace.notes;
    j["alpha"] = trace.alpha;
    j["k"] = trace.final_k;
    j["ablation"] = {{"translator", trace.ablation.translator},
                     {"router", trace.ablation.router},
                     {"postprocessors", trace.ablation.postprocessors}};
    j["total_ms"] = trace.total_ms;
    return nlohmann::json::parse(j.dump());
}

Pipeline::Pipeline(PipelineConfig config, ProviderSet providers)
    : config_(std::move(config)), providers_(std::move(providers)) {
    config_.validate();
    if (!providers_.llm || !providers_.embedder || !providers_.translator || !providers_.detector || !providers_.reranker) {
        throw ConfigError("providers", "every provider must be configured");
    }
}

void Pipeline::load(std::shared_ptr<const CorpusStore> corpus, std::shared_ptr<const TypedIndexSet> indices) {
    std::lock_guard lock(mutex_);
    corpus_ = std::move(corpus);
    indices_ = std::move(indices);
}

bool Pipeline::ready() const {
    std::lock_guard lock(mutex_);
    return corpus_ && indices_;
}

std::shared_ptr<const CorpusStore> Pipeline::corpus() const {
    std::lock_guard lock(mutex_);
    return corpus_;
}

std::shared_ptr<const TypedIndexSet> Pipeline::indices() const {
    std::lock_guard lock(mutex_);
    return indices_;
}

PipelineResult Pipeline::query(std::string_view raw_query, const QueryOverrides& overrides) const {
    std::shared_ptr<const CorpusStore> corpus;
    std::shared_ptr<const TypedIndexSet> indices;
    {
        std::lock_guard lock(mutex_);
        corpus = corpus_;
        indices = indices_;
    }
    if (!corpus || !indices) throw IndexNotReady();

    RetrievalParams retrieval = config_.retrieval;
    if (overrides.alpha) retrieval.alpha = *overrides.alpha;
    if (overrides.k) retrieval.final_k = *overrides.k;
    retrieval.validate();
    AblationFlags ablation = config_.ablation;
    if (overrides.translator) ablation.translator = *overrides.translator;
    if (overrides.router) ablation.router = *overrides.router;
    if (overrides.postprocessors) ablation.postprocessors = *overrides.postprocessors;

    PipelineResult result;
    auto& trace = result.trace;
    auto& response = result.response;
    trace.alpha = retrieval.alpha;
    trace.final_k = retrieval.final_k;
    trace.ablation = ablation;
    std::set<std::string> flags;
    const auto total_start = Clock::now();
    trace.stages.reserve(kStageOrder.size());
    auto stage = [&](std::string_view name) -> StageRecord& {
        trace.stages.push_back({std::string(name), false, 0.0, {}});
        return trace.stages.back();
    };

    // translate
    auto t0 = Clock::now();
    auto& translate = stage(kStageOrder[0]);
    trace.language = detect_language(raw_query, *providers_.detector, &trace.notes);
    if (ablation.translator) {
        const auto translated = to_english(raw_query, trace.language, *providers_.translator, &trace.notes);
        trace.query_en = translated.english;
        trace.translation_degraded = translated.degraded;
        translate.skipped = translated.bypassed;
        if (translated.degraded) flags.insert("query_translation_failed");
    } else {
        trace.query_en = std::string(raw_query);
        translate.skipped = true;
    }
    translate.ms = ms_since(t0);
    const std::string& query = trace.query_en;

    // route
    t0 = Clock::now();
    auto& route = stage(kStageOrder[1]);
    if (ablation.router) {
        trace.route = classify_query(query, providers_.llm.get());
    } else {
        route.skipped = true;
        trace.merged_index = true;
        trace.route.engines.assign(kAllFileTypes.begin(), kAllFileTypes.end());
        trace.route.rationale = "router disabled; querying the merged index";
    }
    route.ms = ms_since(t0);

    // retrieve
    t0 = Clock::now();
    auto& retrieve = stage(kStageOrder[2]);
    std::vector<ScoredNode> nodes;
    try {
        const auto query_vector = providers_.embedder->embed(query);
        if (ablation.router) {
            const auto results = route_and_query(query, trace.route, *indices, retrieval, query_vector, &trace.notes);
            for (const auto& r : results) {
                trace.candidates.push_back({std::string(to_string(r.file_type)), r.bm25_candidates, r.vector_candidates,
                                            r.missing_index});
            }
            nodes = summarize_results(results, retrieval.final_k);
        } else {
            auto hybrid = hybrid_retrieve(query, query_vector, indices->merged, retrieval);
            trace.candidates.push_back({"merged", hybrid.bm25_candidates, hybrid.vector_candidates, false});
            nodes = std::move(hybrid.nodes);
        }
    } catch (const ProviderError& e) {
        trace.notes.push_back(std::string("retrieval failed: ") + e.what());
        flags.insert("retrieval_failed");
        nodes.clear();
    }
    retrieve.node_ids = chunk_ids(nodes);
    retrieve.ms = ms_since(t0);

    // postprocess
    t0 = Clock::now();
    auto& post = stage(kStageOrder[3]);
    const bool do_rerank = ablation.postprocessors && config_.postprocess.rerank_enabled;
    const bool do_reorder = ablation.postprocessors && config_.postprocess.reorder_enabled;
    post.skipped = !do_rerank && !do_reorder;
    if (do_rerank && !nodes.empty()) {
        std::vector<std::string> texts;
        texts.reserve(nodes.size());
        for (const auto& n : nodes) {
            const Chunk* c = indices->chunk(n.chunk_id);
            texts.push_back(c ? c->text : std::string());
        }
        auto outcome = rerank(query, nodes, texts, *providers_.reranker, config_.postprocess.rerank_top_n, &trace.notes);
        if (outcome.degraded) flags.insert("rerank_failed");
        nodes = std::move(outcome.nodes);
    }
    if (do_reorder) nodes = long_context_reorder(nodes);
    post.node_ids = chunk_ids(nodes);
    post.ms = ms_since(t0);

    // synthesize
    t0 = Clock::now();
    auto& synth = stage(kStageOrder[4]);
    response = synthesize(query, nodes, *providers_.llm, config_.prompt, *corpus, *indices);
    synth.ms = ms_since(t0);

    // backtranslate
    t0 = Clock::now();
    auto& back = stage(kStageOrder[5]);
    if (ablation.translator && !trace.language.is_english()) {
        auto translated = from_english(response.text, trace.language, *providers_.translator, &trace.notes);
        response.text = std::move(translated.text);
        trace.response_translation_degraded = translated.degraded;
        if (translated.degraded) flags.insert("response_translation_failed");
        response.cited_file_ids = extract_file_ids(response.text, *corpus);
    } else {
        back.skipped = true;
    }
    back.ms = ms_since(t0);

    trace.total_ms = ms_since(total_start);
    response.degradation_flags.insert(flags.begin(), flags.end());
    response.timings.clear();
    for (const auto& s : trace.stages) response.timings[s.name] = s.ms;
    response.timings["total"] = trace.total_ms;
    return result;
}

} // namespace smartsearch
