#include "smartsearch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "smartsearch/errors.hpp"
#include "smartsearch/parallel.hpp"
#include "smartsearch/text.hpp"

namespace smartsearch {
namespace {

// Corpus vocabulary. None of these words occur in the query templates, so a
// lexical match between a query and a file can only come from the topic.
struct TypeVocab {
    std::vector<std::string> nouns;
    std::vector<std::string> adjectives;
    std::vector<std::string> openers;
    std::vector<std::string> formats;
};

const TypeVocab& vocab(FileType type) {
    static const TypeVocab image{{"photograph", "snapshot", "portrait", "panorama", "still"},
                                 {"vivid", "grainy", "monochrome", "sharp", "faded"},
                                 {"The frame shows", "In the foreground we see", "The shot captures"},
                                 {"jpeg", "png", "tiff"}};
    static const TypeVocab audio{{"recording", "broadcast", "interview", "soundscape", "podcast"},
                                 {"crackling", "crisp", "muffled", "stereo", "archival"},
                                 {"The narrator describes", "Listeners hear", "The host discusses"},
                                 {"mp3", "wav", "flac"}};
    static const TypeVocab video{{"footage", "newsreel", "clip", "reel", "montage"},
                                 {"handheld", "aerial", "slow", "widescreen", "restored"},
                                 {"The camera follows", "The sequence opens on", "Viewers watch"},
                                 {"mp4", "mov", "mkv"}};
    static const TypeVocab document{{"report", "article", "memo", "essay", "pamphlet"},
                                    {"detailed", "concise", "annotated", "typed", "illustrated"},
                                    {"The author examines", "This text outlines", "The pages summarise"},
                                    {"pdf", "docx", "txt"}};
    switch (type) {
    case FileType::image: return image;
    case FileType::audio: return audio;
    case FileType::video: return video;
    case FileType::document: return document;
    }
    return document;
}

const std::map<std::string, std::vector<std::string>>& topic_details() {
    static const std::map<std::string, std::vector<std::string>> details = {
        {"wildlife", {"lions", "herons", "a river delta", "migrating elk", "the savanna", "nesting turtles"}},
        {"landscapes", {"mountain ridges", "a quiet valley", "coastal cliffs", "rolling dunes", "alpine lakes"}},
        {"celebrities", {"a film premiere", "red carpet guests", "a famous singer", "an award gala", "fans"}},
        {"political events", {"a parliament session", "an election rally", "a summit", "campaign speeches"}},
        {"sports", {"a marathon", "the final match", "cheering crowds", "a stadium", "sprinters"}},
        {"architecture", {"gothic arches", "a glass tower", "old bridges", "a cathedral facade", "courtyards"}},
        {"cuisine", {"street food", "a chef", "fresh noodles", "spice markets", "baked bread"}},
        {"space exploration", {"a rocket launch", "the lunar surface", "astronauts", "orbital stations"}},
        {"climate change", {"melting glaciers", "rising seas", "drought", "carbon emissions", "heat waves"}},
        {"traditional festivals", {"lantern parades", "folk dancers", "harvest rites", "drums", "masks"}},
    };
    return details;
}

const std::vector<std::string>& generic_details() {
    static const std::vector<std::string> details = {"the region", "local people", "a public square", "the season"};
    return details;
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(rng() % items.size())];
}

std::string make_file_id(std::mt19937_64& rng) {
    std::string id = std::to_string(1 + rng() % 9);
    for (int i = 0; i < 9; ++i) id += static_cast<char>('0' + rng() % 10);
    return id;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    return "\"" + replace_all(s, "\"", "\"\"") + "\"";
}

std::string types_field(const std::vector<FileType>& types) {
    std::vector<std::string> names;
    for (const auto t : types) names.emplace_back(to_string(t));
    return join(names, ";");
}

std::string_view to_string(QueryLanguage lang) { return lang == QueryLanguage::ko ? "ko" : "en"; }

GroupMetrics mean_of(const std::string& name, const std::vector<const QueryOutcome*>& rows) {
    GroupMetrics g;
    g.group = name;
    g.queries = rows.size();
    if (rows.empty()) return g;
    double p = 0.0, r = 0.0, f = 0.0;
    std::size_t hits = 0;
    for (const auto* row : rows) {
        p += row->metrics.precision;
        r += row->metrics.recall;
        f += row->metrics.f1;
        if (row->metrics.hit) ++hits;
    }
    const double n = static_cast<double>(rows.size());
    g.precision = 100.0 * p / n;
    g.recall = 100.0 * r / n;
    g.f1 = 100.0 * f / n;
    g.hit_rate = 100.0 * static_cast<double>(hits) / n;
    return g;
}

std::string arrow(double delta) {
    if (delta > 0.0) return "↑";
    if (delta < 0.0) return "↓";
    return "=";
}

std::string signed2(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << std::abs(v);
    return s.str();
}

} // namespace

std::string_view to_string(QueryType type) noexcept {
    switch (type) {
    case QueryType::one_filetype: return "one_filetype";
    case QueryType::two_filetypes: return "two_filetypes";
    case QueryType::all_filetypes: return "all_filetypes";
    }
    return "one_filetype";
}

std::string_view to_string(Variant variant) noexcept {
    switch (variant) {
    case Variant::baseline: return "baseline";
    case Variant::no_translator: return "no_translator";
    case Variant::no_router: return "no_router";
    case Variant::no_postprocessors: return "no_postprocessors";
    }
    return "baseline";
}

Variant parse_variant(std::string_view value) {
    for (const auto v : {Variant::baseline, Variant::no_translator, Variant::no_router, Variant::no_postprocessors}) {
        if (to_string(v) == value) return v;
    }
    throw ConfigError("variants", "unknown variant '" + std::string(value) + "'");
}

const std::vector<std::string>& default_topics() {
    static const std::vector<std::string> topics = {"wildlife",     "landscapes", "celebrities",       "political events",
                                                    "sports",       "architecture", "cuisine",         "space exploration",
                                                    "climate change", "traditional festivals"};
    return topics;
}

CorpusStore generate_corpus(const std::vector<std::string>& topics, std::size_t per_cell, std::uint64_t seed) {
    if (per_cell < 1) throw ConfigError("per_cell", "must be at least 1");
    std::mt19937_64 rng(seed);
    CorpusStore corpus(topics);
    std::set<std::string> used_ids;
    for (const auto type : kAllFileTypes) {
        const auto& v = vocab(type);
        for (const auto& topic : topics) {
            const auto it = topic_details().find(topic);
            const auto& details = it != topic_details().end() ? it->second : generic_details();
            for (std::size_t ordinal = 0; ordinal < per_cell; ++ordinal) {
                ArchiveFile f;
                do {
                    f.file_id = make_file_id(rng);
                } while (!used_ids.insert(f.file_id).second);
                f.file_type = type;
                f.topic = topic;
                const auto& adjective = pick(rng, v.adjectives);
                const auto& noun = pick(rng, v.nouns);
                f.title = capitalize(adjective) + " " + topic + " " + noun;
                const auto& opener = pick(rng, v.openers);
                const auto& detail = pick(rng, details);
                std::string text = "A " + adjective + " " + noun + " on " + topic + ". " + opener + " " + detail + ".";
                const std::size_t extra = static_cast<std::size_t>(rng() % 3);
                for (std::size_t e = 0; e < extra; ++e) {
                    const auto& more_opener = pick(rng, v.openers);
                    const auto& first = pick(rng, details);
                    const auto& second = pick(rng, details);
                    text += " " + more_opener + " " + first + " and " + second + ".";
                }
                if (ordinal % 3 != 2) {
                    if (auto ko = mock_korean_term(topic)) text += " Catalog keywords: " + *ko + ".";
                }
                f.text_repr = text;
                f.metadata_physical["format"] = pick(rng, v.formats);
                f.metadata_physical["size_bytes"] = std::to_string(10000 + rng() % 5000000);
                const auto year = 1990 + rng() % 34;
                const auto month = 1 + rng() % 12;
                const auto day = 1 + rng() % 28;
                char created[16];
                std::snprintf(created, sizeof created, "%04llu-%02llu-%02llu", static_cast<unsigned long long>(year),
                              static_cast<unsigned long long>(month), static_cast<unsigned long long>(day));
                f.metadata_physical["created"] = created;
                f.metadata_custom["collection"] = "synthetic benchmark";
                corpus.add(std::move(f));
            }
        }
    }
    return corpus;
}

std::vector<EvalQuery> generate_queries(const std::vector<std::string>& topics, bool free_size) {
    if (!free_size && topics.size() != kBenchmarkTopicCount) throw TopicCountMismatch(kBenchmarkTopicCount, topics.size());
    std::vector<EvalQuery> queries;
    auto add = [&](QueryType qt, std::vector<FileType> targets, const std::string& topic, std::string text) {
        EvalQuery q;
        char id[16];
        std::snprintf(id, sizeof id, "Q%03zu", queries.size() + 1);
        q.query_id = id;
        q.query_type = qt;
        q.target_types = std::move(targets);
        q.topic = topic;
        q.text_ko = MockTranslator::to_korean(text);
        q.text_en = std::move(text);
        queries.push_back(std::move(q));
    };
    for (const auto& topic : topics) {
        for (const auto type : kAllFileTypes) {
            add(QueryType::one_filetype, {type}, topic,
                "Recommend some " + std::string(to_string(type)) + " files about " + topic);
        }
    }
    for (const auto& topic : topics) {
        for (std::size_t i = 0; i < kAllFileTypes.size(); ++i) {
            for (std::size_t j = i + 1; j < kAllFileTypes.size(); ++j) {
                add(QueryType::two_filetypes, {kAllFileTypes[i], kAllFileTypes[j]}, topic,
                    "Retrieve some " + std::string(to_string(kAllFileTypes[i])) + " or " +
                        std::string(to_string(kAllFileTypes[j])) + " files about " + topic);
            }
        }
    }
    for (const auto& topic : topics) {
        add(QueryType::all_filetypes, {kAllFileTypes.begin(), kAllFileTypes.end()}, topic,
            "Give me some files about " + topic);
    }
    return queries;
}

Metrics compute_metrics(const std::set<std::string>& retrieved, const std::set<std::string>& relevant) {
    std::size_t common = 0;
    for (const auto& id : retrieved) common += relevant.count(id);
    Metrics m;
    const double c = static_cast<double>(common);
    m.precision = retrieved.empty() ? 0.0 : c / static_cast<double>(retrieved.size());
    m.recall = relevant.empty() ? 0.0 : c / static_cast<double>(relevant.size());
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.hit = common > 0;
    return m;
}

std::set<std::string> ground_truth(const EvalQuery& query, const CorpusStore& corpus) {
    const std::set<FileType> targets(query.target_types.begin(), query.target_types.end());
    std::set<std::string> relevant;
    for (const auto& [id, file] : corpus.files()) {
        if (file.topic == query.topic && targets.count(file.file_type)) relevant.insert(id);
    }
    return relevant;
}

const GroupMetrics& MetricsReport::group(std::string_view name) const {
    for (const auto& g : groups) {
        if (g.group == name) return g;
    }
    throw Error("report has no group " + std::string(name));
}

MetricsReport build_report(std::vector<QueryOutcome> rows, std::string label, std::string fingerprint, std::string backend) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.query_id < b.query_id; });
    MetricsReport report;
    report.label = std::move(label);
    report.per_query = std::move(rows);
    report.config_fingerprint = std::move(fingerprint);
    report.backend = std::move(backend);
    std::vector<const QueryOutcome*> all;
    std::vector<GroupMetrics> type_groups;
    for (const auto qt : {QueryType::one_filetype, QueryType::two_filetypes, QueryType::all_filetypes}) {
        std::vector<const QueryOutcome*> members;
        for (const auto& row : report.per_query) {
            if (row.query_type == qt) members.push_back(&row);
        }
        if (!members.empty()) type_groups.push_back(mean_of(std::string(to_string(qt)), members));
    }
    for (const auto& row : report.per_query) all.push_back(&row);
    report.groups = type_groups;
    report.groups.push_back(mean_of("average_micro", all));
    GroupMetrics macro;
    macro.group = "average_macro";
    macro.queries = all.size();
    if (!type_groups.empty()) {
        for (const auto& g : type_groups) {
            macro.precision += g.precision;
            macro.recall += g.recall;
            macro.f1 += g.f1;
            macro.hit_rate += g.hit_rate;
        }
        const double n = static_cast<double>(type_groups.size());
        macro.precision /= n;
        macro.recall /= n;
        macro.f1 /= n;
        macro.hit_rate /= n;
    }
    report.groups.push_back(macro);
    return report;
}

std::string config_fingerprint(const Pipeline& pipeline, const ExperimentOptions& options) {
    const auto& cfg = pipeline.config();
    const auto& r = cfg.retrieval;
    const auto& pp = cfg.postprocess;
    AblationFlags ab = cfg.ablation;
    const auto& o = options.overrides;
    if (o.translator) ab.translator = *o.translator;
    if (o.router) ab.router = *o.router;
    if (o.postprocessors) ab.postprocessors = *o.postprocessors;
    std::ostringstream canon;
    canon << "alpha=" << fixed6(o.alpha.value_or(r.alpha)) << ";top_k=" << r.top_k_per_branch
          << ";final_k=" << o.k.value_or(r.final_k) << ";rerank=" << pp.rerank_enabled << ";top_n=" << pp.rerank_top_n
          << ";reorder=" << pp.reorder_enabled << ";translator=" << ab.translator << ";router=" << ab.router
          << ";postprocessors=" << ab.postprocessors << ";lang=" << to_string(options.language)
          << ";llm=" << pipeline.providers().llm->describe() << ";embed=" << pipeline.providers().embedder->describe();
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon.str())));
    return buf;
}

MetricsReport run_experiment(const Pipeline& pipeline, const std::vector<EvalQuery>& queries,
                             const ExperimentOptions& options) {
    const auto corpus = pipeline.corpus();
    if (!corpus) throw IndexNotReady();
    std::vector<QueryOutcome> rows(queries.size());
    parallel_for(queries.size(), options.workers, [&](std::size_t i) {
        const auto& q = queries[i];
        auto& row = rows[i];
        row.query_id = q.query_id;
        row.query_type = q.query_type;
        row.topic = q.topic;
        row.target_types = q.target_types;
        row.language = options.language;
        const auto relevant = ground_truth(q, *corpus);
        row.relevant_count = relevant.size();
        const std::string& text = options.language == QueryLanguage::ko && q.text_ko ? *q.text_ko : q.text_en;
        try {
            const auto result = pipeline.query(text, options.overrides);
            row.retrieved_ids = result.response.cited_file_ids;
            row.stage_ms = result.response.timings;
            if (!result.response.degradation_flags.empty()) {
                std::vector<std::string> flags(result.response.degradation_flags.begin(), result.response.degradation_flags.end());
                row.error = join(flags, ";");
            }
        } catch (const std::exception& e) {
            row.retrieved_ids.clear();
            row.error = e.what();
        }
        row.metrics = compute_metrics({row.retrieved_ids.begin(), row.retrieved_ids.end()}, relevant);
    });
    return build_report(std::move(rows), options.label, config_fingerprint(pipeline, options), options.backend);
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

std::vector<MetricsReport> alpha_sweep(const Pipeline& pipeline, const std::vector<EvalQuery>& queries,
                                       const std::vector<double>& alphas, ExperimentOptions options) {
    std::vector<MetricsReport> reports;
    const std::string base_label = options.label;
    for (const double alpha : alphas) {
        options.overrides.alpha = alpha;
        options.label = base_label + "@alpha=" + fixed6(alpha).substr(0, 3);
        reports.push_back(run_experiment(pipeline, queries, options));
    }
    return reports;
}

std::vector<AblationRow> run_ablation(const Pipeline& pipeline, const std::vector<EvalQuery>& queries,
                                      const std::vector<Variant>& variants, ExperimentOptions options) {
    std::vector<Variant> order = {Variant::baseline};
    for (const auto v : variants) {
        if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
    }
    std::vector<AblationRow> rows;
    const auto base_overrides = options.overrides;
    for (const auto v : order) {
        options.overrides = base_overrides;
        if (v == Variant::no_translator) options.overrides.translator = false;
        if (v == Variant::no_router) options.overrides.router = false;
        if (v == Variant::no_postprocessors) options.overrides.postprocessors = false;
        options.label = std::string(to_string(v));
        AblationRow row;
        row.variant = v;
        row.report = run_experiment(pipeline, queries, options);
        rows.push_back(std::move(row));
    }
    const auto& base = rows.front().report.micro();
    for (auto& row : rows) {
        const auto& m = row.report.micro();
        row.delta.group = "delta";
        row.delta.queries = m.queries;
        row.delta.precision = m.precision - base.precision;
        row.delta.recall = m.recall - base.recall;
        row.delta.f1 = m.f1 - base.f1;
        row.delta.hit_rate = m.hit_rate - base.hit_rate;
    }
    return rows;
}

std::vector<MetricsReport> compare_llms(const Pipeline& base,
                                        const std::vector<std::pair<std::string, std::shared_ptr<const LlmProvider>>>& llms,
                                        const std::vector<EvalQuery>& queries, ExperimentOptions options) {
    std::vector<MetricsReport> reports;
    for (const auto& [label, llm] : llms) {
        auto providers = base.providers();
        providers.llm = llm;
        Pipeline pipeline(base.config(), providers);
        pipeline.load(base.corpus(), base.indices());
        options.label = label;
        reports.push_back(run_experiment(pipeline, queries, options));
    }
    return reports;
}

void write_report_csv(std::ostream& out, const MetricsReport& report) {
    out << "label,query_id,query_type,topic,target_types,language,retrieved_ids,relevant_count,precision,recall,f1,hit,"
           "error";
    for (const auto stage : kStageOrder) out << ',' << stage << "_ms";
    out << ",total_ms\n";
    for (const auto& row : report.per_query) {
        out << csv_field(report.label) << ',' << row.query_id << ',' << to_string(row.query_type) << ','
            << csv_field(row.topic) << ',' << types_field(row.target_types) << ',' << to_string(row.language) << ','
            << join(row.retrieved_ids, ";") << ',' << row.relevant_count << ',' << fixed6(row.metrics.precision) << ','
            << fixed6(row.metrics.recall) << ',' << fixed6(row.metrics.f1) << ',' << (row.metrics.hit ? 1 : 0) << ','
            << csv_field(row.error);
        for (const auto stage : kStageOrder) {
            const auto it = row.stage_ms.find(std::string(stage));
            out << ',' << fixed6(it == row.stage_ms.end() ? 0.0 : it->second);
        }
        const auto total = row.stage_ms.find("total");
        out << ',' << fixed6(total == row.stage_ms.end() ? 0.0 : total->second) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
    out << "label,group,queries,precision,recall,f1,hit_rate,config_fingerprint,backend\n";
    for (const auto& report : reports) {
        for (const auto& g : report.groups) {
            out << csv_field(report.label) << ',' << g.group << ',' << g.queries << ',' << fixed6(g.precision) << ','
                << fixed6(g.recall) << ',' << fixed6(g.f1) << ',' << fixed6(g.hit_rate) << ','
                << report.config_fingerprint << ',' << report.backend << '\n';
        }
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<double>& alphas, const std::vector<MetricsReport>& reports) {
    out << "alpha,queries,precision,recall,f1,hit_rate,config_fingerprint\n";
    for (std::size_t i = 0; i < reports.size() && i < alphas.size(); ++i) {
        const auto& m = reports[i].micro();
        out << fixed6(alphas[i]) << ',' << m.queries << ',' << fixed6(m.precision) << ',' << fixed6(m.recall) << ','
            << fixed6(m.f1) << ',' << fixed6(m.hit_rate) << ',' << reports[i].config_fingerprint << '\n';
    }
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
    out << "variant,queries,precision,recall,f1,hit_rate,delta_precision,delta_recall,delta_f1,delta_hit_rate\n";
    for (const auto& row : rows) {
        const auto& m = row.report.micro();
        out << to_string(row.variant) << ',' << m.queries << ',' << fixed6(m.precision) << ',' << fixed6(m.recall) << ','
            << fixed6(m.f1) << ',' << fixed6(m.hit_rate) << ',' << fixed6(row.delta.precision) << ','
            << fixed6(row.delta.recall) << ',' << fixed6(row.delta.f1) << ',' << fixed6(row.delta.hit_rate) << '\n';
    }
}

void write_queries_csv(std::ostream& out, const std::vector<EvalQuery>& queries) {
    out << "query_id,query_type,topic,target_types,text_en,text_ko\n";
    for (const auto& q : queries) {
        out << q.query_id << ',' << to_string(q.query_type) << ',' << csv_field(q.topic) << ','
            << types_field(q.target_types) << ',' << csv_field(q.text_en) << ',' << csv_field(q.text_ko.value_or(""))
            << '\n';
    }
}

std::string format_summary_table(const MetricsReport& report) {
    std::ostringstream s;
    s << report.label << " [" << report.backend << ", " << report.config_fingerprint << "]\n";
    s << std::left << std::setw(16) << "group" << std::right << std::setw(8) << "queries" << std::setw(11) << "precision"
      << std::setw(9) << "recall" << std::setw(9) << "f1" << std::setw(10) << "hit_rate" << '\n';
    s << std::fixed << std::setprecision(2);
    for (const auto& g : report.groups) {
        s << std::left << std::setw(16) << g.group << std::right << std::setw(8) << g.queries << std::setw(11)
          << g.precision << std::setw(9) << g.recall << std::setw(9) << g.f1 << std::setw(10) << g.hit_rate << '\n';
    }
    return s.str();
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream s;
    s << std::left << std::setw(20) << "variant" << std::right << std::setw(18) << "precision" << std::setw(18) << "recall"
      << std::setw(18) << "f1" << std::setw(18) << "hit_rate" << '\n';
    for (const auto& row : rows) {
        const auto& m = row.report.micro();
        auto cell = [&](double value, double delta) {
            std::ostringstream c;
            c << std::fixed << std::setprecision(2) << value;
            if (row.variant != Variant::baseline) c << " (" << arrow(delta) << signed2(delta) << ")";
            return c.str();
        };
        s << std::left << std::setw(20) << to_string(row.variant) << std::right << std::setw(18)
          << cell(m.precision, row.delta.precision) << std::setw(18) << cell(m.recall, row.delta.recall) << std::setw(18)
          << cell(m.f1, row.delta.f1) << std::setw(18) << cell(m.hit_rate, row.delta.hit_rate) << '\n';
    }
    return s.str();
}

} // namespace smartsearch
