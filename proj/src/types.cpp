#include "smartsearch/types.hpp"

#include "smartsearch/errors.hpp"

namespace smartsearch {

std::string_view to_string(FileType type) noexcept {
    switch (type) {
    case FileType::image: return "image";
    case FileType::audio: return "audio";
    case FileType::video: return "video";
    case FileType::document: return "document";
    }
    return "document";
}

std::optional<FileType> try_parse_file_type(std::string_view value) noexcept {
    for (const auto type : kAllFileTypes) {
        if (to_string(type) == value) return type;
    }
    return std::nullopt;
}

FileType parse_file_type(std::string_view value) {
    if (auto type = try_parse_file_type(value)) return *type;
    throw UnknownFileType(std::string(value));
}

} // namespace smartsearch
