#include "smartsearch/server.hpp"

#include <filesystem>

#include <httplib.h>

#include "smartsearch/errors.hpp"
#include "smartsearch/text.hpp"

namespace smartsearch {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    send_json(res, status, {{"error", kind}, {"message", message}});
}

} // namespace

QueryRequest parse_query_request(const json& body) {
    if (!body.is_object()) throw ConfigError("body", "must be a JSON object");
    QueryRequest req;
    for (const auto& [key, value] : body.items()) {
        if (key == "query") {
            if (!value.is_string() || trim(value.get<std::string>()).empty()) {
                throw ConfigError("query", "must be a non-empty string");
            }
            req.query = value.get<std::string>();
        } else if (key == "alpha") {
            if (value.is_null()) continue;
            if (!value.is_number()) throw ConfigError("alpha", "must be a number");
            const double alpha = value.get<double>();
            if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must be within [0, 1]");
            req.overrides.alpha = alpha;
        } else if (key == "k") {
            if (value.is_null()) continue;
            if (!value.is_number_unsigned() || value.get<std::size_t>() < 1) {
                throw ConfigError("k", "must be a positive integer");
            }
            req.overrides.k = value.get<std::size_t>();
        } else if (key == "ablation") {
            if (value.is_null()) continue;
            if (!value.is_object()) throw ConfigError("ablation", "must be an object");
            for (const auto& [flag, on] : value.items()) {
                if (on.is_null()) continue;
                if (!on.is_boolean()) throw ConfigError("ablation." + flag, "must be a boolean");
                if (flag == "translator") {
                    req.overrides.translator = on.get<bool>();
                } else if (flag == "router") {
                    req.overrides.router = on.get<bool>();
                } else if (flag == "postprocessors") {
                    req.overrides.postprocessors = on.get<bool>();
                } else {
                    throw ConfigError("ablation." + flag, "unknown flag");
                }
            }
        } else {
            throw ConfigError(key, "unknown field");
        }
    }
    if (req.query.empty()) throw ConfigError("query", "is required");
    return req;
}

json query_response_json(const PipelineResult& result, const CorpusStore& corpus, const std::string& url_template) {
    json files = json::array();
    for (const auto& id : result.response.cited_file_ids) {
        json entry = {{"file_id", id}, {"url", replace_all(url_template, "{file_id}", id)}};
        if (const auto* f = corpus.find(id)) {
            entry["title"] = f->title;
            entry["file_type"] = std::string(to_string(f->file_type));
        }
        files.push_back(entry);
    }
    return {{"text", result.response.text},
            {"file_ids", result.response.cited_file_ids},
            {"files", files},
            {"language", result.trace.language.code},
            {"translation_degraded", result.trace.translation_degraded || result.trace.response_translation_degraded},
            {"degradation_flags", result.response.degradation_flags},
            {"trace", trace_to_json(result.trace)}};
}

struct SearchServer::Impl {
    AppConfig config;
    std::shared_ptr<Pipeline> pipeline;
    httplib::Server http;
};

SearchServer::SearchServer(AppConfig config, std::shared_ptr<Pipeline> pipeline) : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    impl_->pipeline = std::move(pipeline);
    auto& http = impl_->http;
    Impl* self = impl_.get();

    http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    http.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    http.Get("/healthz", [self](const httplib::Request&, httplib::Response& res) {
        if (!self->pipeline->ready()) {
            send_json(res, 503, {{"status", "index_not_ready"}});
            return;
        }
        send_json(res, 200, {{"status", "ok"}, {"files", self->pipeline->corpus()->size()}});
    });

    http.Get("/v1/config", [self](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, redacted_config(self->config));
    });

    http.Post("/v1/query", [self](const httplib::Request& req, httplib::Response& res) {
        QueryRequest query;
        try {
            query = parse_query_request(json::parse(req.body));
        } catch (const json::parse_error& e) {
            send_error(res, 400, "invalid_json", e.what());
            return;
        } catch (const ConfigError& e) {
            send_error(res, 400, "invalid_request", e.what());
            return;
        }
        try {
            const auto result = self->pipeline->query(query.query, query.overrides);
            send_json(res, 200, query_response_json(result, *self->pipeline->corpus(), self->config.server.url_template));
        } catch (const IndexNotReady& e) {
            send_error(res, 503, "index_not_ready", e.what());
        } catch (const ConfigError& e) {
            send_error(res, 400, "invalid_request", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    });

    const auto& ui = impl_->config.server.ui_dir;
    if (!ui.empty() && std::filesystem::is_directory(ui)) http.set_mount_point("/ui", ui.string());
}

SearchServer::~SearchServer() { stop(); }

int SearchServer::bind() {
    const auto& s = impl_->config.server;
    if (s.port == 0) {
        port_ = impl_->http.bind_to_any_port(s.host);
    } else {
        port_ = impl_->http.bind_to_port(s.host, s.port) ? s.port : -1;
    }
    if (port_ < 0) throw Error("cannot bind " + s.host + ":" + std::to_string(s.port));
    return port_;
}

void SearchServer::run() {
    if (port_ < 0) bind();
    impl_->http.listen_after_bind();
}

void SearchServer::stop() {
    if (impl_) impl_->http.stop();
}

} // namespace smartsearch
