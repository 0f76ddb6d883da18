#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "smartsearch/corpus.hpp"
#include "smartsearch/pipeline.hpp"
#include "smartsearch/types.hpp"

namespace smartsearch {

enum class QueryType { one_filetype, two_filetypes, all_filetypes };

std::string_view to_string(QueryType type) noexcept;

struct EvalQuery {
    std::string query_id;
    std::string text_en;
    std::optional<std::string> text_ko;
    QueryType query_type = QueryType::one_filetype;
    std::vector<FileType> target_types; // engine order
    std::string topic;
};

/// The ten benchmark topics in English.
const std::vector<std::string>& default_topics();

/// Synthetic archive: per_cell files for every (file type, topic) cell, with
/// seeded titles and textual representations that mention the topic. IDs are
/// 10-digit strings.
CorpusStore generate_corpus(const std::vector<std::string>& topics, std::size_t per_cell, std::uint64_t seed);

inline constexpr std::size_t kBenchmarkTopicCount = 10;

/// One query per (type, topic), one per (unordered type pair, topic) and one
/// per topic naming no type. Throws TopicCountMismatch unless there are
/// exactly ten topics or free_size is set.
std::vector<EvalQuery> generate_queries(const std::vector<std::string>& topics, bool free_size = false);

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool hit = false;
};

Metrics compute_metrics(const std::set<std::string>& retrieved, const std::set<std::string>& relevant);

/// Files whose topic matches and whose type is a target of the query.
std::set<std::string> ground_truth(const EvalQuery& query, const CorpusStore& corpus);

enum class QueryLanguage { en, ko };

struct QueryOutcome {
    std::string query_id;
    QueryType query_type = QueryType::one_filetype;
    std::string topic;
    std::vector<FileType> target_types;
    QueryLanguage language = QueryLanguage::en;
    std::vector<std::string> retrieved_ids; // cited IDs, in response order
    std::size_t relevant_count = 0;
    Metrics metrics;
    std::string error;
    std::map<std::string, double> stage_ms; // includes "total"
};

/// Means in percent over one group of queries.
struct GroupMetrics {
    std::string group;
    std::size_t queries = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double hit_rate = 0.0;
};

struct MetricsReport {
    std::string label;
    std::vector<QueryOutcome> per_query; // sorted by query_id
    /// one_filetype, two_filetypes, all_filetypes (when present), then
    /// average_micro (over queries) and average_macro (over groups).
    std::vector<GroupMetrics> groups;
    std::string config_fingerprint;
    std::string backend;

    const GroupMetrics& group(std::string_view name) const;
    const GroupMetrics& micro() const { return group("average_micro"); }
};

/// Aggregates rows into a report. Rows are sorted by query_id first so the
/// result does not depend on completion order.
MetricsReport build_report(std::vector<QueryOutcome> rows, std::string label, std::string fingerprint, std::string backend);

struct ExperimentOptions {
    QueryLanguage language = QueryLanguage::en;
    std::size_t workers = 4;
    QueryOverrides overrides;
    std::string label = "run";
    std::string backend = "mock";
};

/// Stable identifier of everything that shapes the metrics of a run.
std::string config_fingerprint(const Pipeline& pipeline, const ExperimentOptions& options);

/// Runs every query through the full pipeline with at most options.workers
/// queries in flight. The retrieved set of a query is the IDs cited in the
/// response. A query that fails counts as a miss with its error recorded.
MetricsReport run_experiment(const Pipeline& pipeline, const std::vector<EvalQuery>& queries,
                             const ExperimentOptions& options = {});

/// Default grid 0.0, 0.1, ..., 1.0.
std::vector<double> default_alpha_grid();

std::vector<MetricsReport> alpha_sweep(const Pipeline& pipeline, const std::vector<EvalQuery>& queries,
                                       const std::vector<double>& alphas, ExperimentOptions options = {});

enum class Variant { baseline, no_translator, no_router, no_postprocessors };

std::string_view to_string(Variant variant) noexcept;
Variant parse_variant(std::string_view value);

struct AblationRow {
    Variant variant = Variant::baseline;
    MetricsReport report;
    GroupMetrics delta; // variant minus baseline, micro averages
};

/// Baseline plus one run per variant, each with its deltas against the
/// baseline.
std::vector<AblationRow> run_ablation(const Pipeline& pipeline, const std::vector<EvalQuery>& queries,
                                      const std::vector<Variant>& variants, ExperimentOptions options = {});

/// Runs the same queries once per LLM, sharing everything else.
std::vector<MetricsReport> compare_llms(const Pipeline& base, const std::vector<std::pair<std::string, std::shared_ptr<const LlmProvider>>>& llms,
                                        const std::vector<EvalQuery>& queries, ExperimentOptions options = {});

// CSV output. Columns are fixed; timing columns end in "_ms".
void write_report_csv(std::ostream& out, const MetricsReport& report);
void write_summary_csv(std::ostream& out, const std::vector<MetricsReport>& reports);
void write_sweep_csv(std::ostream& out, const std::vector<double>& alphas, const std::vector<MetricsReport>& reports);
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);
void write_queries_csv(std::ostream& out, const std::vector<EvalQuery>& queries);

/// Console table with arrows marking the direction of each delta.
std::string format_ablation_table(const std::vector<AblationRow>& rows);
std::string format_summary_table(const MetricsReport& report);

} // namespace smartsearch
