#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "smartsearch/corpus.hpp"
#include "smartsearch/providers.hpp"
#include "smartsearch/types.hpp"

namespace smartsearch {

struct Chunk {
    std::string chunk_id; // "<file_id>#<ordinal>"
    std::string file_id;
    std::size_t ordinal = 0;
    std::string text;
    std::size_t token_count = 0;

    bool operator==(const Chunk&) const = default;
};

struct ChunkParams {
    std::size_t chunk_size = 256; // tokens
    std::size_t overlap = 32;     // tokens shared by consecutive chunks

    void validate() const; // throws InvalidChunkParams
};

std::string make_chunk_id(std::string_view file_id, std::size_t ordinal);

/// Sliding token window with stride chunk_size - overlap. Each chunk's text is
/// the verbatim source span from its first to its last token, so re-tokenizing
/// a chunk yields exactly its window. Text without tokens yields no chunks.
std::vector<Chunk> chunk_text(std::string_view file_id, std::string_view text, const ChunkParams& params);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi BM25 over an in-memory inverted index. IDF uses the non-negative form
/// ln(1 + (N - df + 0.5) / (df + 0.5)); repeated query terms count once.
class Bm25Index {
public:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
        bool operator==(const Posting&) const = default;
    };

    Bm25Index() = default;
    /// Throws EmptyIndexInput.
    static Bm25Index build(const std::vector<Chunk>& chunks, Bm25Params params = {});
    /// Rebuilds from persisted postings; validates consistency.
    static Bm25Index from_parts(std::vector<std::string> doc_ids, std::vector<std::uint32_t> doc_lengths,
                                std::unordered_map<std::string, std::vector<Posting>> postings, Bm25Params params);

    /// Top-k chunks containing at least one query term, by score descending
    /// then chunk_id ascending. Only bm25_score is set on the nodes.
    std::vector<ScoredNode> search(std::string_view query, std::size_t k) const;
    /// Score of one chunk (0 when it shares no term with the query).
    double score(std::string_view query, std::string_view chunk_id) const;
    double idf(std::string_view term) const;

    std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }
    const std::unordered_map<std::string, std::vector<Posting>>& postings() const noexcept { return postings_; }
    std::optional<std::uint32_t> doc_length(std::string_view chunk_id) const;

private:
    void finalize();
    std::vector<double> score_all(std::string_view query, std::vector<bool>& matched) const;

    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    std::unordered_map<std::string, std::uint32_t> doc_index_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_doc_length_ = 0.0;
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Exact (flat scan) cosine-similarity index.
class VectorIndex {
public:
    struct Entry {
        std::string chunk_id;
        EmbeddingVector vector;
    };

    VectorIndex() = default;
    explicit VectorIndex(std::size_t dims) : dims_(dims) {}

    /// Throws DimensionMismatch, or Error for non-finite values.
    void add(std::string chunk_id, EmbeddingVector vector);
    /// Top-k by cosine descending then chunk_id ascending. Throws
    /// DimensionMismatch.
    std::vector<ScoredNode> search(const EmbeddingVector& query, std::size_t k) const;

    std::size_t dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }

private:
    std::size_t dims_ = 0;
    std::vector<Entry> entries_;
};

/// The two retrieval indices over one set of chunks.
struct IndexPair {
    Bm25Index bm25;
    VectorIndex vectors;
};

struct IndexBuildParams {
    ChunkParams chunking;
    Bm25Params bm25;
    std::size_t parallelism = 4; // concurrent embedding calls
};

/// One index pair per file type present in the corpus, plus a merged pair over
/// every chunk (used when routing is disabled).
struct TypedIndexSet {
    std::map<FileType, IndexPair> per_type;
    IndexPair merged;
    std::unordered_map<std::string, Chunk> chunk_lookup;
    std::unordered_map<std::string, FileType> chunk_types;
    IndexBuildParams params;
    std::string embedder;
    std::size_t dims = 0;

    const IndexPair* find(FileType type) const;
    const Chunk* chunk(std::string_view chunk_id) const;
};

/// Throws EmptyIndexInput for an empty corpus; chunking and provider errors
/// propagate.
TypedIndexSet build_typed_indices(const CorpusStore& corpus, const IndexBuildParams& params,
                                  const EmbeddingProvider& embedder);

inline constexpr int kIndexFormatVersion = 1;

/// Directory layout: manifest.json plus, per file type, <type>.chunks.jsonl,
/// <type>.postings.json and <type>.vectors.bin.
void save_index_set(const TypedIndexSet& set, const std::filesystem::path& dir);
/// Throws IndexFormatError on unknown versions or inconsistent files.
TypedIndexSet load_index_set(const std::filesystem::path& dir);

} // namespace smartsearch
