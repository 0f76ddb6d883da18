#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smartsearch/providers.hpp"
#include "smartsearch/types.hpp"

namespace smartsearch {

using StringMap = std::map<std::string, std::string>;

/// One archive record. Binary media never enters the system; only its
/// textual surrogate (`text_repr`) and metadata do.
struct ArchiveFile {
    std::string file_id; // decimal digits, kept as text to preserve leading zeros
    FileType file_type = FileType::document;
    std::string topic;
    std::string title;
    std::string text_repr;
    StringMap metadata_physical; // format, size in bytes, creation date
    StringMap metadata_custom;
    StringMap metadata_ai; // generated descriptions, transcripts
    /// Unknown record keys kept in lax mode, as serialized JSON values.
    StringMap extra;

    bool operator==(const ArchiveFile&) const = default;
};

bool is_valid_file_id(std::string_view id) noexcept;

/// Immutable-after-load collection of archive files.
class CorpusStore {
public:
    CorpusStore() = default;
    /// `topics` fixes the closed topic set; when empty the set is derived from
    /// the files in first-appearance order.
    explicit CorpusStore(std::vector<std::string> topics) : topics_(std::move(topics)), topics_fixed_(!topics_.empty()) {}

    /// Throws DuplicateFileId, UnknownTopic, or MalformedRecord (line 0) on
    /// invalid fields.
    void add(ArchiveFile file);

    const std::map<std::string, ArchiveFile>& files() const noexcept { return files_; }
    const std::vector<std::string>& topics() const noexcept { return topics_; }
    const std::map<FileType, std::size_t>& per_type_counts() const noexcept { return per_type_counts_; }
    std::size_t size() const noexcept { return files_.size(); }
    bool empty() const noexcept { return files_.empty(); }

    bool contains(std::string_view file_id) const;
    const ArchiveFile* find(std::string_view file_id) const;
    /// Files in insertion order.
    const std::vector<std::string>& order() const noexcept { return order_; }

    bool operator==(const CorpusStore& other) const {
        return files_ == other.files_ && topics_ == other.topics_ && order_ == other.order_;
    }

private:
    std::map<std::string, ArchiveFile> files_;
    std::vector<std::string> order_;
    std::vector<std::string> topics_;
    std::map<FileType, std::size_t> per_type_counts_;
    bool topics_fixed_ = false;
};

struct CorpusLoadOptions {
    /// Reject unknown record keys (default); lax mode preserves them.
    bool strict = true;
    /// Closed topic set; empty means derive from the records.
    std::vector<std::string> topics;
};

/// Parses line-delimited JSON records. Blank lines are ignored; line numbers
/// in errors are 1-based.
CorpusStore parse_corpus(std::istream& in, const CorpusLoadOptions& options = {});
CorpusStore load_corpus(const std::filesystem::path& path, const CorpusLoadOptions& options = {});

/// Writes records in insertion order, one JSON object per line.
void write_corpus(std::ostream& out, const CorpusStore& corpus);
void save_corpus(const std::filesystem::path& path, const CorpusStore& corpus);

std::string serialize_record(const ArchiveFile& file);

/// Fills an empty text_repr with a provider-generated description and records
/// it under metadata_ai["generated_description"]. Files that already carry a
/// text_repr are returned unchanged. ProviderError propagates; the input is
/// never modified.
ArchiveFile enrich_text_repr(const ArchiveFile& file, const LlmProvider& llm);

/// Enriches every file lacking a text_repr, with at most `parallelism`
/// concurrent provider calls.
CorpusStore enrich_corpus(const CorpusStore& corpus, const LlmProvider& llm, std::size_t parallelism = 4);

std::string build_describe_prompt(const ArchiveFile& file);

} // namespace smartsearch
