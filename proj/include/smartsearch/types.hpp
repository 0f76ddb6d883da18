#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smartsearch {

enum class FileType { image, audio, video, document };

/// Fixed engine order used everywhere a per-type result list is produced.
inline constexpr std::array<FileType, 4> kAllFileTypes = {FileType::image, FileType::audio, FileType::video,
                                                          FileType::document};

std::string_view to_string(FileType type) noexcept;
/// Throws UnknownFileType.
FileType parse_file_type(std::string_view value);
std::optional<FileType> try_parse_file_type(std::string_view value) noexcept;

/// Dense representation of a chunk or a query.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dims() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

/// ISO-639-1 language code plus detector confidence.
struct LanguageTag {
    std::string code = "en";
    double confidence = 0.0;

    bool is_english() const noexcept { return code == "en"; }
    bool operator==(const LanguageTag&) const = default;
};

/// A retrieved chunk with every score the pipeline may attach to it.
struct ScoredNode {
    std::string chunk_id;
    std::string file_id;
    std::optional<double> bm25_score;
    std::optional<double> vector_score;
    std::optional<double> bm25_norm;
    std::optional<double> vector_norm;
    std::optional<double> hybrid_score;
    std::optional<double> rerank_score;

    bool operator==(const ScoredNode&) const = default;
};

} // namespace smartsearch
