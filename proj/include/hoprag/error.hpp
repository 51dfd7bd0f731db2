#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hoprag {

/// Base of every error raised by the engine. `kind()` groups errors into the
/// CLI exit-code classes.
class Error : public std::runtime_error {
public:
    enum class Kind { Config, Data, Provider };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Kind::Config, what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(Kind::Config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Kind::Data, what) {}
};

class InvalidDistribution : public DataError {
public:
    using DataError::DataError;
};

class InvalidWeight : public DataError {
public:
    using DataError::DataError;
};

class EmptySegment : public DataError {
public:
    EmptySegment() : DataError("empty segment: no token events") {}
};

class MissingSpan : public DataError {
public:
    explicit MissingSpan(const std::string& surface)
        : DataError("entity '" + surface + "' has no token span") {}
};

class InvalidExample : public DataError {
public:
    using DataError::DataError;
};

/// Malformed input line. `line()` is 1-based.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateKey : public DataError {
public:
    explicit DuplicateKey(const std::string& key)
        : DataError("duplicate key '" + key + "'"), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& what) : Error(Kind::Provider, what) {}
};

class TraceExhausted : public ProviderError {
public:
    explicit TraceExhausted(std::size_t calls)
        : ProviderError("trace exhausted after " + std::to_string(calls) + " calls") {}
};

class BackendUnreachable : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class ProtocolViolation : public ProviderError {
public:
    using ProviderError::ProviderError;
};

} // namespace hoprag
