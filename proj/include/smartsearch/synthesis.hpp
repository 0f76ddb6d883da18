#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "smartsearch/corpus.hpp"
#include "smartsearch/indexing.hpp"
#include "smartsearch/providers.hpp"
#include "smartsearch/types.hpp"

namespace smartsearch {

inline constexpr std::string_view kNoMatchText = "No matching files were found.";
inline constexpr std::string_view kSynthesisFailedText = "The search service could not generate a response.";

/// Prompt template with the slots {query}, {chunks} and {format_instructions}.
struct SynthesisPrompt {
    std::string template_text;
    std::string format_instructions;

    /// Throws ConfigError unless every slot occurs exactly once.
    void validate() const;

    static SynthesisPrompt default_prompt();
    /// Reads the template from a text file; format instructions stay default.
    static SynthesisPrompt load(const std::filesystem::path& path);
};

/// Format instructions plus one line per distinct file type in `types`.
std::string format_instructions_for(const SynthesisPrompt& prompt, const std::set<FileType>& types);

/// Renders the chunks as `[file_id: N] type: T | title: X` followed by the
/// chunk text, in the order given. Nodes whose chunk is unknown are skipped.
std::string render_prompt(std::string_view query_en, const std::vector<ScoredNode>& nodes, const SynthesisPrompt& prompt,
                          const CorpusStore& corpus, const TypedIndexSet& indices);

struct SynthesizedResponse {
    std::string text;
    std::vector<std::string> cited_file_ids;
    std::set<std::string> degradation_flags;
    std::map<std::string, double> timings; // stage -> milliseconds
};

/// Single LLM call over all nodes. No nodes gives kNoMatchText without calling
/// the LLM; a provider failure gives kSynthesisFailedText, no citations and
/// the "synthesis_failed" flag.
SynthesizedResponse synthesize(std::string_view query_en, const std::vector<ScoredNode>& nodes, const LlmProvider& llm,
                               const SynthesisPrompt& prompt, const CorpusStore& corpus, const TypedIndexSet& indices);

/// Corpus file IDs mentioned in `text`, first occurrence first, no repeats.
/// `[file_id: N]` markers and bare maximal digit runs both count; runs that
/// are not corpus IDs are ignored.
std::vector<std::string> extract_file_ids(std::string_view text, const CorpusStore& corpus);

} // namespace smartsearch
