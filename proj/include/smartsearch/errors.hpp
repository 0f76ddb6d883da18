#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smartsearch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, const std::string& detail)
        : Error("malformed record at line " + std::to_string(line) + ": " + detail), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateFileId : public Error {
public:
    explicit DuplicateFileId(std::string id)
        : Error("duplicate file_id \"" + id + "\""), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class UnknownFileType : public Error {
public:
    explicit UnknownFileType(std::string value)
        : Error("unknown file_type \"" + value + "\""), value_(std::move(value)) {}
    const std::string& value() const noexcept { return value_; }

private:
    std::string value_;
};

class UnknownTopic : public Error {
public:
    explicit UnknownTopic(const std::string& topic) : Error("topic \"" + topic + "\" is not in the configured topic set") {}
};

class InvalidChunkParams : public Error {
public:
    using Error::Error;
};

class EmptyIndexInput : public Error {
public:
    EmptyIndexInput() : Error("cannot build an index from empty input") {}
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: index has " + std::to_string(expected) + " dims, query has " +
                std::to_string(got)) {}
};

class NoScoresForBranch : public Error {
public:
    explicit NoScoresForBranch(const std::string& branch)
        : Error("no node carries a " + branch + " score") {}
};

class IndexFormatError : public Error {
public:
    using Error::Error;
};

class IndexNotReady : public Error {
public:
    IndexNotReady() : Error("indices are not loaded; run ingest first") {}
};

class TopicCountMismatch : public Error {
public:
    TopicCountMismatch(std::size_t expected, std::size_t got)
        : Error("benchmark needs exactly " + std::to_string(expected) + " topics, got " + std::to_string(got)) {}
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& detail)
        : Error("config field '" + field + "': " + detail), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Failure of an external (or mock) intelligence provider.
class ProviderError : public Error {
public:
    enum class Kind { timeout, status, malformed, unavailable, invalid_input };

    ProviderError(Kind kind, const std::string& detail) : Error(detail), kind_(kind) {}
    explicit ProviderError(const std::string& detail) : ProviderError(Kind::unavailable, detail) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

} // namespace smartsearch
