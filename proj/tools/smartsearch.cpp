// smartsearch command-line entry point: ingest, serve, query and the
// evaluation subcommands.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "smartsearch/config.hpp"
#include "smartsearch/corpus.hpp"
#include "smartsearch/errors.hpp"
#include "smartsearch/eval.hpp"
#include "smartsearch/indexing.hpp"
#include "smartsearch/pipeline.hpp"
#include "smartsearch/server.hpp"
#include "smartsearch/text.hpp"

namespace fs = std::filesystem;
using namespace smartsearch;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct CommonOptions {
    std::string config_path;
    bool lax = false;
    std::optional<double> alpha;
    std::optional<std::size_t> branch_k;
    std::optional<std::size_t> k;
    bool no_rerank = false;
    bool no_reorder = false;
    std::optional<std::size_t> rerank_top_n;
    bool no_translator = false;
    bool no_router = false;
    bool no_postprocessors = false;
    std::string backend = "mock";
};

void add_config_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON configuration file");
}

void add_retrieval_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--alpha", o.alpha, "fusion weight: 0 lexical only, 1 dense only")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--branch-k", o.branch_k, "candidates per retrieval branch")->check(CLI::PositiveNumber);
    cmd->add_option("--k", o.k, "nodes kept after fusion")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-rerank", o.no_rerank, "skip reranking");
    cmd->add_flag("--no-reorder", o.no_reorder, "skip long-context reordering");
    cmd->add_option("--rerank-top-n", o.rerank_top_n, "nodes kept by the reranker")->check(CLI::PositiveNumber);
}

void add_ablation_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_flag("--no-translator", o.no_translator, "disable query and response translation");
    cmd->add_flag("--no-router", o.no_router, "query the merged index instead of routing");
    cmd->add_flag("--no-postprocessors", o.no_postprocessors, "disable rerank and reorder");
}

void add_backend_flag(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--backend", o.backend, "provider backend")->check(CLI::IsMember({"mock", "http"}));
}

AppConfig load_app_config(const CommonOptions& o) {
    AppConfig cfg = o.config_path.empty() ? default_config() : load_config(o.config_path);
    auto& p = cfg.pipeline;
    if (o.alpha) p.retrieval.alpha = *o.alpha;
    if (o.branch_k) p.retrieval.top_k_per_branch = *o.branch_k;
    if (o.k) p.retrieval.final_k = *o.k;
    if (o.no_rerank) p.postprocess.rerank_enabled = false;
    if (o.no_reorder) p.postprocess.reorder_enabled = false;
    if (o.rerank_top_n) p.postprocess.rerank_top_n = *o.rerank_top_n;
    if (o.no_translator) p.ablation.translator = false;
    if (o.no_router) p.ablation.router = false;
    if (o.no_postprocessors) p.ablation.postprocessors = false;
    if (o.lax) cfg.strict_corpus = false;
    cfg.validate();
    return cfg;
}

ProviderSet providers_for(const AppConfig& cfg, const std::string& backend) {
    if (backend == "mock") return make_mock_providers(cfg.providers.mock);
    auto set = cfg.providers;
    for (auto* p : {&set.llm, &set.embedding, &set.translation, &set.detection, &set.rerank}) p->backend = Backend::http;
    return make_providers(set);
}

CorpusStore read_corpus(const AppConfig& cfg, const fs::path& path) {
    CorpusLoadOptions opts;
    opts.strict = cfg.strict_corpus;
    opts.topics = cfg.topics;
    return load_corpus(path, opts);
}

std::shared_ptr<Pipeline> make_pipeline(const AppConfig& cfg, const ProviderSet& providers,
                                        std::shared_ptr<const CorpusStore> corpus, std::shared_ptr<const TypedIndexSet> index) {
    auto pipeline = std::make_shared<Pipeline>(cfg.pipeline, providers);
    if (corpus && index) pipeline->load(std::move(corpus), std::move(index));
    return pipeline;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    writer(out);
    if (!out) throw Error("write failed for " + path.string());
}

// Evaluation fixture: the configured corpus when --corpus is given, otherwise
// the seeded synthetic corpus; indices are built in memory.
struct EvalSetup {
    AppConfig cfg;
    ProviderSet providers;
    std::shared_ptr<Pipeline> pipeline;
    std::vector<EvalQuery> queries;
};

struct EvalOptions {
    std::uint64_t seed = 7;
    std::optional<std::size_t> per_cell;
    std::string corpus_path;
    std::string lang = "en";
    std::string out_dir = "eval_out";
    bool free_size = false;
    std::optional<std::size_t> workers;
};

void add_eval_flags(CLI::App* cmd, EvalOptions& e, const std::string& default_lang) {
    e.lang = default_lang;
    cmd->add_option("--seed", e.seed, "seed for the synthetic corpus");
    cmd->add_option("--per-cell", e.per_cell, "files per (type, topic) cell")->check(CLI::PositiveNumber);
    cmd->add_option("--corpus", e.corpus_path, "evaluate on this corpus instead of a synthetic one");
    cmd->add_option("--lang", e.lang, "query language")->check(CLI::IsMember({"en", "ko"}));
    cmd->add_option("--out", e.out_dir, "output directory for CSV files");
    cmd->add_flag("--free-size", e.free_size, "allow a topic count other than ten");
    cmd->add_option("--workers", e.workers, "concurrent queries")->check(CLI::PositiveNumber);
}

EvalSetup prepare_eval(const CommonOptions& o, const EvalOptions& e) {
    EvalSetup s;
    s.cfg = load_app_config(o);
    s.providers = providers_for(s.cfg, o.backend);
    std::shared_ptr<CorpusStore> corpus;
    if (!e.corpus_path.empty()) {
        corpus = std::make_shared<CorpusStore>(read_corpus(s.cfg, e.corpus_path));
    } else {
        const auto& topics = s.cfg.topics.empty() ? default_topics() : s.cfg.topics;
        corpus = std::make_shared<CorpusStore>(generate_corpus(topics, e.per_cell.value_or(s.cfg.eval.per_cell), e.seed));
    }
    auto index = std::make_shared<TypedIndexSet>(build_typed_indices(*corpus, s.cfg.indexing, *s.providers.embedder));
    s.pipeline = make_pipeline(s.cfg, s.providers, corpus, index);
    const auto& topics = !s.cfg.topics.empty() ? s.cfg.topics : corpus->topics();
    s.queries = generate_queries(topics, e.free_size);
    return s;
}

ExperimentOptions experiment_options(const EvalSetup& s, const CommonOptions& o, const EvalOptions& e) {
    ExperimentOptions opts;
    opts.language = e.lang == "ko" ? QueryLanguage::ko : QueryLanguage::en;
    opts.workers = e.workers.value_or(s.cfg.eval.workers);
    opts.backend = o.backend;
    return opts;
}

int run_ingest(const CommonOptions& o, const std::string& corpus_override, const std::string& index_override, bool enrich) {
    auto cfg = load_app_config(o);
    const fs::path corpus_path = corpus_override.empty() ? cfg.corpus_path : fs::path(corpus_override);
    const fs::path index_dir = index_override.empty() ? cfg.index_dir : fs::path(index_override);
    const auto providers = providers_for(cfg, o.backend);
    auto corpus = read_corpus(cfg, corpus_path);
    if (enrich) {
        corpus = enrich_corpus(corpus, *providers.llm, cfg.indexing.parallelism);
        save_corpus(corpus_path, corpus);
    }
    const auto index = build_typed_indices(corpus, cfg.indexing, *providers.embedder);
    save_index_set(index, index_dir);
    std::cout << "indexed " << corpus.size() << " files into " << index.chunk_lookup.size() << " chunks at "
              << index_dir.string() << "\n";
    for (const auto& [type, count] : corpus.per_type_counts()) std::cout << "  " << to_string(type) << ": " << count << "\n";
    return 0;
}

std::pair<std::shared_ptr<const CorpusStore>, std::shared_ptr<const TypedIndexSet>> load_artifacts(const AppConfig& cfg) {
    auto corpus = std::make_shared<const CorpusStore>(read_corpus(cfg, cfg.corpus_path));
    auto index = std::make_shared<const TypedIndexSet>(load_index_set(cfg.index_dir));
    return {corpus, index};
}

int run_serve(const CommonOptions& o, std::optional<int> port, std::optional<std::string> host) {
    auto cfg = load_app_config(o);
    if (port) cfg.server.port = *port;
    if (host) cfg.server.host = *host;
    cfg.validate();
    const auto providers = providers_for(cfg, o.backend);
    auto pipeline = make_pipeline(cfg, providers, nullptr, nullptr);
    SearchServer server(cfg, pipeline);
    const int bound = server.bind();

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread watcher([&] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    });
    std::thread loader([&] {
        if (!fs::exists(cfg.index_dir / "manifest.json")) {
            std::cerr << "no index at " << cfg.index_dir.string() << "; /healthz reports 503 until ingest\n";
            return;
        }
        try {
            auto [corpus, index] = load_artifacts(cfg);
            pipeline->load(corpus, index);
            std::cerr << "index loaded: " << corpus->size() << " files\n";
        } catch (const std::exception& e) {
            std::cerr << "index load failed: " << e.what() << "\n";
        }
    });
    std::cerr << "listening on " << cfg.server.host << ":" << bound << "\n";
    server.run();
    g_stop = true;
    loader.join();
    watcher.join();
    std::cerr << "shut down\n";
    return 0;
}

int run_query(const CommonOptions& o, const std::string& text, bool as_json) {
    auto cfg = load_app_config(o);
    const auto providers = providers_for(cfg, o.backend);
    if (!fs::exists(cfg.index_dir / "manifest.json")) throw IndexNotReady();
    auto [corpus, index] = load_artifacts(cfg);
    auto pipeline = make_pipeline(cfg, providers, corpus, index);
    const auto result = pipeline->query(text);
    if (as_json) {
        std::cout << query_response_json(result, *corpus, cfg.server.url_template).dump(2) << "\n";
        return 0;
    }
    std::cout << result.response.text << "\n\n";
    std::cout << "file_ids: " << join(result.response.cited_file_ids, ", ") << "\n";
    std::cout << "language: " << result.trace.language.code << "\n";
    for (const auto& s : result.trace.stages) {
        std::cout << "  " << s.name << (s.skipped ? " (skipped)" : "") << ": " << s.ms << " ms\n";
    }
    return 0;
}

int run_eval(const CommonOptions& o, const EvalOptions& e, const std::vector<std::string>& llm_modes) {
    auto s = prepare_eval(o, e);
    auto opts = experiment_options(s, o, e);
    std::vector<MetricsReport> reports;
    if (llm_modes.empty()) {
        opts.label = s.providers.llm->describe();
        reports.push_back(run_experiment(*s.pipeline, s.queries, opts));
    } else {
        std::vector<std::pair<std::string, std::shared_ptr<const LlmProvider>>> llms;
        for (const auto& mode : llm_modes) {
            if (o.backend == "http") {
                auto cfg = s.cfg.providers.llm;
                cfg.backend = Backend::http;
                cfg.model_id = mode;
                llms.emplace_back(mode, make_llm(cfg, s.cfg.providers.mock));
            } else {
                llms.emplace_back(mode, std::make_shared<MockLlm>(parse_llm_mode(mode)));
            }
        }
        reports = compare_llms(*s.pipeline, llms, s.queries, opts);
    }
    const fs::path out(e.out_dir);
    write_file(out / "report.csv", [&](std::ostream& os) {
        for (std::size_t i = 0; i < reports.size(); ++i) {
            std::ostringstream part;
            write_report_csv(part, reports[i]);
            const auto text = part.str();
            os << (i == 0 ? text : text.substr(text.find('\n') + 1));
        }
    });
    write_file(out / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, reports); });
    for (const auto& r : reports) std::cout << format_summary_table(r) << "\n";
    std::cout << "wrote " << (out / "report.csv").string() << " and " << (out / "summary.csv").string() << "\n";
    return 0;
}

int run_sweep(const CommonOptions& o, const EvalOptions& e, std::vector<double> alphas) {
    if (alphas.empty()) alphas = default_alpha_grid();
    auto s = prepare_eval(o, e);
    auto opts = experiment_options(s, o, e);
    opts.label = "sweep";
    const auto reports = alpha_sweep(*s.pipeline, s.queries, alphas, opts);
    const fs::path out(e.out_dir);
    write_file(out / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, alphas, reports); });
    write_file(out / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, reports); });
    std::ifstream in(out / "sweep.csv");
    std::cout << in.rdbuf() << "wrote " << (out / "sweep.csv").string() << "\n";
    return 0;
}

int run_ablate(const CommonOptions& o, const EvalOptions& e, const std::vector<std::string>& variant_names) {
    std::vector<Variant> variants;
    if (variant_names.empty()) {
        variants = {Variant::no_translator, Variant::no_router, Variant::no_postprocessors};
    } else {
        for (const auto& name : variant_names) variants.push_back(parse_variant(name));
    }
    auto s = prepare_eval(o, e);
    const auto rows = run_ablation(*s.pipeline, s.queries, variants, experiment_options(s, o, e));
    const fs::path out(e.out_dir);
    write_file(out / "ablation.csv", [&](std::ostream& os) { write_ablation_csv(os, rows); });
    std::vector<MetricsReport> reports;
    for (const auto& r : rows) reports.push_back(r.report);
    write_file(out / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, reports); });
    std::cout << format_ablation_table(rows) << "wrote " << (out / "ablation.csv").string() << "\n";
    return 0;
}

int run_gen_corpus(const CommonOptions& o, std::uint64_t seed, std::size_t per_cell, const std::string& out) {
    const auto cfg = load_app_config(o);
    const auto& topics = cfg.topics.empty() ? default_topics() : cfg.topics;
    const auto corpus = generate_corpus(topics, per_cell, seed);
    write_file(out, [&](std::ostream& os) { write_corpus(os, corpus); });
    std::cout << "wrote " << corpus.size() << " files to " << out << "\n";
    return 0;
}

int run_gen_queries(const CommonOptions& o, bool free_size, const std::string& out) {
    const auto cfg = load_app_config(o);
    const auto& topics = cfg.topics.empty() ? default_topics() : cfg.topics;
    const auto queries = generate_queries(topics, free_size);
    if (out.empty()) {
        write_queries_csv(std::cout, queries);
    } else {
        write_file(out, [&](std::ostream& os) { write_queries_csv(os, queries); });
        std::cout << "wrote " << queries.size() << " queries to " << out << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Smart search over multimodal digital archives"};
    app.require_subcommand(1);
    CommonOptions o;

    auto* ingest = app.add_subcommand("ingest", "load a corpus, build and save the indices");
    std::string ingest_corpus, ingest_index;
    bool enrich = false;
    add_config_flags(ingest, o);
    add_backend_flag(ingest, o);
    ingest->add_flag("--lax", o.lax, "keep unknown record keys instead of rejecting them");
    ingest->add_option("--corpus", ingest_corpus, "corpus JSONL (overrides corpus_path)");
    ingest->add_option("--index-dir", ingest_index, "index directory (overrides index_dir)");
    ingest->add_flag("--enrich", enrich, "describe files lacking text_repr with the LLM and save the corpus");

    auto* serve = app.add_subcommand("serve", "run the HTTP API");
    std::optional<int> port;
    std::optional<std::string> host;
    add_config_flags(serve, o);
    add_backend_flag(serve, o);
    serve->add_flag("--lax", o.lax, "keep unknown record keys");
    serve->add_option("--port", port, "listen port (0 picks a free one)");
    serve->add_option("--host", host, "bind address");
    add_retrieval_flags(serve, o);
    add_ablation_flags(serve, o);

    auto* query = app.add_subcommand("query", "answer one query from the saved index");
    std::string query_text;
    bool as_json = false;
    add_config_flags(query, o);
    add_backend_flag(query, o);
    query->add_flag("--lax", o.lax, "keep unknown record keys");
    query->add_option("text", query_text, "query text")->required();
    query->add_flag("--json", as_json, "print the HTTP response body");
    add_retrieval_flags(query, o);
    add_ablation_flags(query, o);

    EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "run the benchmark and write report.csv and summary.csv");
    std::vector<std::string> llm_modes;
    add_config_flags(eval, o);
    add_backend_flag(eval, o);
    add_retrieval_flags(eval, o);
    add_ablation_flags(eval, o);
    add_eval_flags(eval, eval_opts, "en");
    eval->add_option("--llms", llm_modes, "compare several LLMs (mock modes, or model ids with --backend http)")
        ->delimiter(',');

    EvalOptions sweep_opts;
    auto* sweep = app.add_subcommand("sweep-alpha", "evaluate a grid of alpha values and write sweep.csv");
    std::vector<double> alphas;
    add_config_flags(sweep, o);
    add_backend_flag(sweep, o);
    add_retrieval_flags(sweep, o);
    add_eval_flags(sweep, sweep_opts, "en");
    sweep->add_option("--alphas", alphas, "alpha values (default 0.0,0.1,...,1.0)")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));

    EvalOptions ablate_opts;
    auto* ablate = app.add_subcommand("ablate", "run ablation variants against the baseline and write ablation.csv");
    std::vector<std::string> variants;
    add_config_flags(ablate, o);
    add_backend_flag(ablate, o);
    add_retrieval_flags(ablate, o);
    add_eval_flags(ablate, ablate_opts, "ko");
    ablate->add_option("--variants", variants, "no_translator,no_router,no_postprocessors")->delimiter(',');

    auto* gen_corpus = app.add_subcommand("gen-corpus", "write a synthetic corpus as JSONL");
    std::uint64_t gen_seed = 7;
    std::size_t gen_per_cell = 3;
    std::string gen_out = "corpus.jsonl";
    add_config_flags(gen_corpus, o);
    gen_corpus->add_option("--seed", gen_seed, "generator seed");
    gen_corpus->add_option("--per-cell", gen_per_cell, "files per (type, topic) cell")->check(CLI::PositiveNumber);
    gen_corpus->add_option("--out", gen_out, "output path");

    auto* gen_queries = app.add_subcommand("gen-queries", "write the benchmark queries as CSV");
    bool gen_free = false;
    std::string gen_queries_out;
    add_config_flags(gen_queries, o);
    gen_queries->add_flag("--free-size", gen_free, "allow a topic count other than ten");
    gen_queries->add_option("--out", gen_queries_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return run_ingest(o, ingest_corpus, ingest_index, enrich);
        if (*serve) return run_serve(o, port, host);
        if (*query) return run_query(o, query_text, as_json);
        if (*eval) return run_eval(o, eval_opts, llm_modes);
        if (*sweep) return run_sweep(o, sweep_opts, alphas);
        if (*ablate) return run_ablate(o, ablate_opts, variants);
        if (*gen_corpus) return run_gen_corpus(o, gen_seed, gen_per_cell, gen_out);
        if (*gen_queries) return run_gen_queries(o, gen_free, gen_queries_out);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
