#include "smartsearch/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "smartsearch/errors.hpp"
#include "smartsearch/parallel.hpp"
#include "smartsearch/text.hpp"

namespace smartsearch {
namespace {

using json = nlohmann::json;

constexpr std::string_view kKnownKeys[] = {"file_id",  "file_type",         "topic",           "title",
                                           "text_repr", "metadata_physical", "metadata_custom", "metadata_ai"};

bool is_known_key(std::string_view key) {
    return std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) != std::end(kKnownKeys);
}

std::string required_string(const json& record, const char* key, std::size_t line) {
    const auto it = record.find(key);
    if (it == record.end()) throw MalformedRecord(line, std::string("missing key '") + key + "'");
    if (!it->is_string()) throw MalformedRecord(line, std::string("key '") + key + "' must be a string");
    return it->get<std::string>();
}

StringMap optional_map(const json& record, const char* key, std::size_t line) {
    StringMap out;
    const auto it = record.find(key);
    if (it == record.end() || it->is_null()) return out;
    if (!it->is_object()) throw MalformedRecord(line, std::string("key '") + key + "' must be an object");
    for (const auto& [k, v] : it->items()) {
        if (v.is_string()) {
            out[k] = v.get<std::string>();
        } else if (v.is_number() || v.is_boolean()) {
            out[k] = v.dump();
        } else {
            throw MalformedRecord(line, std::string("metadata value '") + k + "' in '" + key + "' must be a scalar");
        }
    }
    return out;
}

ArchiveFile parse_record(const std::string& text, std::size_t line, bool strict) {
    json record;
    try {
        record = json::parse(text);
    } catch (const json::parse_error& e) {
        throw MalformedRecord(line, e.what());
    }
    if (!record.is_object()) throw MalformedRecord(line, "record must be a JSON object");

    ArchiveFile file;
    file.file_id = required_string(record, "file_id", line);
    if (!is_valid_file_id(file.file_id)) throw MalformedRecord(line, "file_id must be a non-empty digit string");
    file.file_type = parse_file_type(required_string(record, "file_type", line));
    file.topic = required_string(record, "topic", line);
    if (file.topic.empty()) throw MalformedRecord(line, "topic must not be empty");
    file.title = required_string(record, "title", line);
    if (const auto it = record.find("text_repr"); it != record.end() && !it->is_null()) {
        if (!it->is_string()) throw MalformedRecord(line, "key 'text_repr' must be a string");
        file.text_repr = it->get<std::string>();
    }
    file.metadata_physical = optional_map(record, "metadata_physical", line);
    file.metadata_custom = optional_map(record, "metadata_custom", line);
    file.metadata_ai = optional_map(record, "metadata_ai", line);
    for (const auto& [key, value] : record.items()) {
        if (is_known_key(key)) continue;
        if (strict) throw MalformedRecord(line, "unknown key '" + key + "' (strict mode)");
        file.extra[key] = value.dump();
    }
    return file;
}

} // namespace

bool is_valid_file_id(std::string_view id) noexcept {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void CorpusStore::add(ArchiveFile file) {
    if (!is_valid_file_id(file.file_id)) throw MalformedRecord(0, "file_id must be a non-empty digit string");
    if (file.topic.empty()) throw MalformedRecord(0, "topic must not be empty");
    if (files_.count(file.file_id)) throw DuplicateFileId(file.file_id);
    if (std::find(topics_.begin(), topics_.end(), file.topic) == topics_.end()) {
        if (topics_fixed_) throw UnknownTopic(file.topic);
        topics_.push_back(file.topic);
    }
    ++per_type_counts_[file.file_type];
    order_.push_back(file.file_id);
    const std::string id = file.file_id;
    files_.emplace(id, std::move(file));
}

bool CorpusStore::contains(std::string_view file_id) const { return files_.count(std::string(file_id)) > 0; }

const ArchiveFile* CorpusStore::find(std::string_view file_id) const {
    const auto it = files_.find(std::string(file_id));
    return it == files_.end() ? nullptr : &it->second;
}

CorpusStore parse_corpus(std::istream& in, const CorpusLoadOptions& options) {
    CorpusStore store(options.topics);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ArchiveFile file = parse_record(line, line_no, options.strict);
        try {
            store.add(std::move(file));
        } catch (const MalformedRecord& e) {
            throw MalformedRecord(line_no, e.what());
        }
    }
    return store;
}

CorpusStore load_corpus(const std::filesystem::path& path, const CorpusLoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file " + path.string());
    return parse_corpus(in, options);
}

std::string serialize_record(const ArchiveFile& file) {
    // ordered_json keeps the documented key order stable in the output.
    nlohmann::ordered_json record;
    record["file_id"] = file.file_id;
    record["file_type"] = std::string(to_string(file.file_type));
    record["topic"] = file.topic;
    record["title"] = file.title;
    record["text_repr"] = file.text_repr;
    record["metadata_physical"] = file.metadata_physical;
    record["metadata_custom"] = file.metadata_custom;
    record["metadata_ai"] = file.metadata_ai;
    for (const auto& [key, value] : file.extra) record[key] = nlohmann::ordered_json::parse(value);
    return record.dump();
}

void write_corpus(std::ostream& out, const CorpusStore& corpus) {
    for (const auto& id : corpus.order()) out << serialize_record(*corpus.find(id)) << '\n';
}

void save_corpus(const std::filesystem::path& path, const CorpusStore& corpus) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write corpus file " + path.string());
    write_corpus(out, corpus);
}

std::string build_describe_prompt(const ArchiveFile& file) {
    std::ostringstream prompt;
    prompt << kTaskDescribe << '\n'
           << "Write one short sentence describing this archive file for search indexing.\n"
           << "file_type: " << to_string(file.file_type) << '\n'
           << "topic: " << file.topic << '\n'
           << "title: " << file.title << '\n';
    for (const auto* group : {&file.metadata_physical, &file.metadata_custom, &file.metadata_ai}) {
        for (const auto& [key, value] : *group) prompt << "metadata " << key << ": " << value << '\n';
    }
    return prompt.str();
}

ArchiveFile enrich_text_repr(const ArchiveFile& file, const LlmProvider& llm) {
    if (!trim(file.text_repr).empty()) return file;
    std::string description = trim(llm.complete(build_describe_prompt(file)));
    if (description.empty()) throw ProviderError(ProviderError::Kind::malformed, "llm returned an empty description");
    ArchiveFile enriched = file;
    enriched.text_repr = description;
    enriched.metadata_ai["generated_description"] = std::move(description);
    return enriched;
}

CorpusStore enrich_corpus(const CorpusStore& corpus, const LlmProvider& llm, std::size_t parallelism) {
    const auto& order = corpus.order();
    std::vector<ArchiveFile> enriched(order.size());
    parallel_for(order.size(), parallelism, [&](std::size_t i) { enriched[i] = enrich_text_repr(*corpus.find(order[i]), llm); });
    CorpusStore out(corpus.topics());
    for (auto& file : enriched) out.add(std::move(file));
    return out;
}

} // namespace smartsearch
