#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cforge {

// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input line; line numbers are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(const std::string& id)
        : Error("duplicate paper id '" + id + "'"), id_(id) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Scorer transport failed after `attempts` tries. Retrying later may succeed.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int attempts)
        : Error(what + " (after " + std::to_string(attempts) + " attempt" +
                (attempts == 1 ? "" : "s") + ")"),
          attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }
    bool retryable() const noexcept { return true; }

private:
    int attempts_;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// A command needs an artifact that an earlier command produces.
class UpstreamMissingError : public Error {
public:
    UpstreamMissingError(const std::string& file, const std::string& producer)
        : Error("missing upstream artifact '" + file + "'; run '" + producer + "' first"),
          file_(file), producer_(producer) {}
    const std::string& file() const noexcept { return file_; }
    const std::string& producer() const noexcept { return producer_; }

private:
    std::string file_;
    std::string producer_;
};

}  // namespace cforge
