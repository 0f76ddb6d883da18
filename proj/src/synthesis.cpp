#include "smartsearch/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "smartsearch/errors.hpp"
#include "smartsearch/text.hpp"

namespace smartsearch {
namespace {

constexpr std::string_view kSlots[] = {"{query}", "{chunks}", "{format_instructions}"};

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

std::string one_line(std::string_view s) {
    std::string out(s);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

std::string_view type_hint(FileType type) {
    switch (type) {
    case FileType::image: return "For image files, describe what the picture shows.";
    case FileType::audio: return "For audio files, describe what can be heard.";
    case FileType::video: return "For video files, describe what the footage shows.";
    case FileType::document: return "For document files, summarise the content.";
    }
    return "";
}

// Replaces each slot in one left-to-right pass so slot-like text inside the
// substituted values is left alone.
std::string fill(const std::string& tmpl, const std::map<std::string_view, std::string>& values) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        bool replaced = false;
        if (tmpl[pos] == '{') {
            for (const auto& [slot, value] : values) {
                if (tmpl.compare(pos, slot.size(), slot) == 0) {
                    out += value;
                    pos += slot.size();
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) out += tmpl[pos++];
    }
    return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

void SynthesisPrompt::validate() const {
    for (const auto slot : kSlots) {
        const auto n = count_occurrences(template_text, slot);
        if (n != 1) {
            throw ConfigError("synthesis.template",
                              "slot " + std::string(slot) + " must appear exactly once (found " + std::to_string(n) + ")");
        }
    }
}

SynthesisPrompt SynthesisPrompt::default_prompt() {
    SynthesisPrompt p;
    p.template_text = std::string(kTaskSynthesize) +
                      "\nYou are the search assistant of a digital archive. Answer the user's request using only "
                      "the retrieved files below.\n\n"
                      "Request: {query}\n\n"
                      "Retrieved files:\n{chunks}\n"
                      "{format_instructions}\n";
    p.format_instructions =
        "Recommend the files that match the request, one per line. Cite every recommended file with the marker "
        "[file_id: <id>] using the exact ID shown above. Do not cite files that are not listed.";
    return p;
}

SynthesisPrompt SynthesisPrompt::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("synthesis.template_path", "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    auto p = default_prompt();
    p.template_text = buf.str();
    p.validate();
    return p;
}

std::string format_instructions_for(const SynthesisPrompt& prompt, const std::set<FileType>& types) {
    std::string out = prompt.format_instructions;
    for (const auto type : kAllFileTypes) {
        if (types.count(type)) out += "\n" + std::string(type_hint(type));
    }
    return out;
}

std::string render_prompt(std::string_view query_en, const std::vector<ScoredNode>& nodes, const SynthesisPrompt& prompt,
                          const CorpusStore& corpus, const TypedIndexSet& indices) {
    std::string chunks;
    std::set<FileType> types;
    for (const auto& node : nodes) {
        const Chunk* chunk = indices.chunk(node.chunk_id);
        const ArchiveFile* file = corpus.find(node.file_id);
        if (chunk == nullptr || file == nullptr) continue;
        types.insert(file->file_type);
        chunks += "[file_id: " + file->file_id + "] type: " + std::string(to_string(file->file_type)) +
                  " | title: " + one_line(file->title) + "\n" + chunk->text + "\n\n";
    }
    return fill(prompt.template_text, {{"{query}", one_line(query_en)},
                                       {"{chunks}", chunks},
                                       {"{format_instructions}", format_instructions_for(prompt, types)}});
}

SynthesizedResponse synthesize(std::string_view query_en, const std::vector<ScoredNode>& nodes, const LlmProvider& llm,
                               const SynthesisPrompt& prompt, const CorpusStore& corpus, const TypedIndexSet& indices) {
    SynthesizedResponse out;
    if (nodes.empty()) {
        out.text = std::string(kNoMatchText);
        out.timings["synthesize"] = 0.0;
        return out;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
        out.text = llm.complete(render_prompt(query_en, nodes, prompt, corpus, indices));
        out.cited_file_ids = extract_file_ids(out.text, corpus);
    } catch (const ProviderError&) {
        out.text = std::string(kSynthesisFailedText);
        out.cited_file_ids.clear();
        out.degradation_flags.insert("synthesis_failed");
    }
    out.timings["synthesize"] = elapsed_ms(start);
    return out;
}

std::vector<std::string> extract_file_ids(std::string_view text, const CorpusStore& corpus) {
    static const std::regex marker(R"(\[file_id:\s*(\d+)\])");
    // position -> candidate ID, so markers and bare runs merge in text order
    std::map<std::size_t, std::string> found;
    const std::string input(text);
    for (auto it = std::sregex_iterator(input.begin(), input.end(), marker); it != std::sregex_iterator(); ++it) {
        found.emplace(static_cast<std::size_t>(it->position(1)), (*it)[1].str());
    }
    std::size_t i = 0;
    while (i < input.size()) {
        if (input[i] < '0' || input[i] > '9') {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        while (i < input.size() && input[i] >= '0' && input[i] <= '9') ++i;
        found.emplace(begin, input.substr(begin, i - begin));
    }
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& [pos, id] : found) {
        if (corpus.contains(id) && seen.insert(id).second) ids.push_back(id);
    }
    return ids;
}

} // namespace smartsearch
