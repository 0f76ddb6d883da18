#include "smartsearch/config.hpp"

#include <fstream>
#include <set>

#include "smartsearch/errors.hpp"

namespace smartsearch {
namespace {

using nlohmann::json;

// Typed access to one JSON object with dotted field paths in errors and a
// check that every key present was consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        const json* v = get(key);
        if (v == nullptr) return;
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v->is_boolean()) throw ConfigError(field(key), "must be a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v->is_string()) throw ConfigError(field(key), "must be a string");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v->is_number()) throw ConfigError(field(key), "must be a number");
            } else if constexpr (std::is_unsigned_v<T>) {
                if (!v->is_number_unsigned()) throw ConfigError(field(key), "must be a non-negative integer");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v->is_number_integer()) throw ConfigError(field(key), "must be an integer");
            }
            out = v->get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(field(key), e.what());
        }
    }

    std::optional<Section> sub(const std::string& key) {
        const json* v = get(key);
        if (v == nullptr) return std::nullopt;
        return Section(*v, field(key));
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p;
}

void read_provider(Section& parent, const std::string& key, ProviderConfig& cfg) {
    auto s = parent.sub(key);
    if (!s) return;
    std::string backend(to_string(cfg.backend));
    s->read("backend", backend);
    try {
        cfg.backend = parse_backend(backend);
    } catch (const ConfigError&) {
        throw ConfigError(s->field("backend"), "expected mock or http");
    }
    std::string value;
    if (s->get("endpoint")) {
        s->read("endpoint", value);
        cfg.endpoint = value;
    }
    if (s->get("auth_env_var")) {
        s->read("auth_env_var", value);
        cfg.auth_env_var = value;
    }
    if (s->get("model_id")) {
        s->read("model_id", value);
        cfg.model_id = value;
    }
    long long timeout = cfg.timeout.count();
    s->read("timeout_ms", timeout);
    cfg.timeout = std::chrono::milliseconds(timeout);
    s->read("max_retries", cfg.max_retries);
    s->finish();
}

std::string mask_userinfo(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) return url;
    const auto host_end = url.find('/', scheme + 3);
    const auto at = url.find('@', scheme + 3);
    if (at == std::string::npos || (host_end != std::string::npos && at > host_end)) return url;
    return url.substr(0, scheme + 3) + "***@" + url.substr(at + 1);
}

json provider_json(const ProviderConfig& cfg) {
    json j = {{"backend", std::string(to_string(cfg.backend))},
              {"timeout_ms", cfg.timeout.count()},
              {"max_retries", cfg.max_retries}};
    j["endpoint"] = cfg.endpoint ? json(mask_userinfo(*cfg.endpoint)) : json(nullptr);
    j["auth_env_var"] = cfg.auth_env_var ? json(*cfg.auth_env_var) : json(nullptr);
    j["model_id"] = cfg.model_id ? json(*cfg.model_id) : json(nullptr);
    return j;
}

void apply_env(ProviderSetConfig& p) {
    for (auto* cfg : {&p.llm, &p.embedding, &p.translation, &p.detection, &p.rerank}) *cfg = apply_env_overrides(*cfg);
}

} // namespace

void AppConfig::validate() const {
    if (corpus_path.empty()) throw ConfigError("corpus_path", "must not be empty");
    if (index_dir.empty()) throw ConfigError("index_dir", "must not be empty");
    try {
        indexing.chunking.validate();
    } catch (const InvalidChunkParams& e) {
        throw ConfigError("chunking", e.what());
    }
    if (!(indexing.bm25.k1 >= 0.0)) throw ConfigError("bm25.k1", "must be non-negative");
    if (!(indexing.bm25.b >= 0.0 && indexing.bm25.b <= 1.0)) throw ConfigError("bm25.b", "must be within [0, 1]");
    if (indexing.parallelism < 1) throw ConfigError("chunking.parallelism", "must be at least 1");
    try {
        pipeline.retrieval.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("retrieval." + e.field(), e.what());
    }
    try {
        pipeline.postprocess.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("postprocess." + e.field(), e.what());
    }
    pipeline.prompt.validate();
    providers.mock.validate();
    for (const auto* p : {&providers.llm, &providers.embedding, &providers.translation, &providers.detection, &providers.rerank}) {
        p->validate();
    }
    if (server.port < 0 || server.port > 65535) throw ConfigError("server.port", "must be within [0, 65535]");
    if (server.host.empty()) throw ConfigError("server.host", "must not be empty");
    if (eval.workers < 1) throw ConfigError("eval.workers", "must be at least 1");
    if (eval.per_cell < 1) throw ConfigError("eval.per_cell", "must be at least 1");
}

AppConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    AppConfig cfg;
    Section root(j, "");
    std::string path = cfg.corpus_path.string();
    root.read("corpus_path", path);
    cfg.corpus_path = resolve(base_dir, path);
    path = cfg.index_dir.string();
    root.read("index_dir", path);
    cfg.index_dir = resolve(base_dir, path);
    if (const json* topics = root.get("topics")) {
        if (!topics->is_array()) throw ConfigError("topics", "must be an array of strings");
        for (const auto& t : *topics) {
            if (!t.is_string() || t.get<std::string>().empty()) throw ConfigError("topics", "must be an array of non-empty strings");
            cfg.topics.push_back(t.get<std::string>());
        }
    }
    root.read("strict_corpus", cfg.strict_corpus);

    if (auto s = root.sub("chunking")) {
        s->read("chunk_size", cfg.indexing.chunking.chunk_size);
        s->read("overlap", cfg.indexing.chunking.overlap);
        s->read("parallelism", cfg.indexing.parallelism);
        s->finish();
    }
    if (auto s = root.sub("bm25")) {
        s->read("k1", cfg.indexing.bm25.k1);
        s->read("b", cfg.indexing.bm25.b);
        s->finish();
    }
    if (auto s = root.sub("retrieval")) {
        s->read("alpha", cfg.pipeline.retrieval.alpha);
        s->read("top_k_per_branch", cfg.pipeline.retrieval.top_k_per_branch);
        s->read("final_k", cfg.pipeline.retrieval.final_k);
        s->finish();
    }
    if (auto s = root.sub("postprocess")) {
        s->read("rerank_enabled", cfg.pipeline.postprocess.rerank_enabled);
        s->read("rerank_top_n", cfg.pipeline.postprocess.rerank_top_n);
        s->read("reorder_enabled", cfg.pipeline.postprocess.reorder_enabled);
        s->finish();
    }
    if (auto s = root.sub("ablation")) {
        s->read("translator", cfg.pipeline.ablation.translator);
        s->read("router", cfg.pipeline.ablation.router);
        s->read("postprocessors", cfg.pipeline.ablation.postprocessors);
        s->finish();
    }
    if (auto s = root.sub("synthesis")) {
        if (s->get("template_path")) {
            s->read("template_path", path);
            cfg.prompt_path = resolve(base_dir, path);
            try {
                cfg.pipeline.prompt = SynthesisPrompt::load(*cfg.prompt_path);
            } catch (const ConfigError& e) {
                throw ConfigError("synthesis.template_path", e.what());
            }
        }
        s->read("format_instructions", cfg.pipeline.prompt.format_instructions);
        s->finish();
    }
    if (auto s = root.sub("providers")) {
        read_provider(*s, "llm", cfg.providers.llm);
        read_provider(*s, "embedding", cfg.providers.embedding);
        read_provider(*s, "translation", cfg.providers.translation);
        read_provider(*s, "detection", cfg.providers.detection);
        read_provider(*s, "rerank", cfg.providers.rerank);
        if (auto m = s->sub("mock")) {
            std::string mode(to_string(cfg.providers.mock.llm_mode));
            m->read("llm_mode", mode);
            try {
                cfg.providers.mock.llm_mode = parse_llm_mode(mode);
            } catch (const ConfigError&) {
                throw ConfigError("providers.mock.llm_mode", "unknown mode '" + mode + "'");
            }
            m->read("embed_dims", cfg.providers.mock.embed_dims);
            m->read("seed", cfg.providers.mock.seed);
            m->finish();
        }
        s->finish();
    }
    if (auto s = root.sub("server")) {
        s->read("host", cfg.server.host);
        s->read("port", cfg.server.port);
        if (s->get("ui_dir")) {
            s->read("ui_dir", path);
            cfg.server.ui_dir = resolve(base_dir, path);
        }
        s->read("url_template", cfg.server.url_template);
        s->finish();
    }
    if (auto s = root.sub("eval")) {
        s->read("workers", cfg.eval.workers);
        s->read("per_cell", cfg.eval.per_cell);
        s->read("seed", cfg.eval.seed);
        s->finish();
    }
    root.finish();
    apply_env(cfg.providers);
    try {
        cfg.providers.mock.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("providers." + e.field(), e.what());
    }
    cfg.validate();
    return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j, path.parent_path());
}

AppConfig default_config() { return parse_config(json::object()); }

json redacted_config(const AppConfig& cfg) {
    json j;
    j["corpus_path"] = cfg.corpus_path.string();
    j["index_dir"] = cfg.index_dir.string();
    j["topics"] = cfg.topics;
    j["strict_corpus"] = cfg.strict_corpus;
    j["chunking"] = {{"chunk_size", cfg.indexing.chunking.chunk_size},
                     {"overlap", cfg.indexing.chunking.overlap},
                     {"parallelism", cfg.indexing.parallelism}};
    j["bm25"] = {{"k1", cfg.indexing.bm25.k1}, {"b", cfg.indexing.bm25.b}};
    j["retrieval"] = {{"alpha", cfg.pipeline.retrieval.alpha},
                      {"top_k_per_branch", cfg.pipeline.retrieval.top_k_per_branch},
                      {"final_k", cfg.pipeline.retrieval.final_k}};
    j["postprocess"] = {{"rerank_enabled", cfg.pipeline.postprocess.rerank_enabled},
                        {"rerank_top_n", cfg.pipeline.postprocess.rerank_top_n},
                        {"reorder_enabled", cfg.pipeline.postprocess.reorder_enabled}};
    j["ablation"] = {{"translator", cfg.pipeline.ablation.translator},
                     {"router", cfg.pipeline.ablation.router},
                     {"postprocessors", cfg.pipeline.ablation.postprocessors}};
    j["synthesis"] = {{"template_path", cfg.prompt_path ? json(cfg.prompt_path->string()) : json(nullptr)}};
    j["providers"] = {{"llm", provider_json(cfg.providers.llm)},
                      {"embedding", provider_json(cfg.providers.embedding)},
                      {"translation", provider_json(cfg.providers.translation)},
                      {"detection", provider_json(cfg.providers.detection)},
                      {"rerank", provider_json(cfg.providers.rerank)},
                      {"mock",
                       {{"llm_mode", std::string(to_string(cfg.providers.mock.llm_mode))},
                        {"embed_dims", cfg.providers.mock.embed_dims},
                        {"seed", cfg.providers.mock.seed}}}};
    j["server"] = {{"host", cfg.server.host},
                   {"port", cfg.server.port},
                   {"ui_dir", cfg.server.ui_dir.string()},
                   {"url_template", cfg.server.url_template}};
    j["eval"] = {{"workers", cfg.eval.workers}, {"per_cell", cfg.eval.per_cell}, {"seed", cfg.eval.seed}};
    return j;
}

} // namespace smartsearch
