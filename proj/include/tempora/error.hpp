#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tempora {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed vertical-format input.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what, const std::string& source = {})
        : Error((source.empty() ? "" : source + ": ") + "line " + std::to_string(line) + ": " + what),
          line_(line), detail_(what) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

/// Bad manifest row, missing file or duplicate document id.
class LoadError : public Error {
public:
    using Error::Error;
};

/// Year outside the range covered by a binning, or class index out of range.
class RangeError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

/// Bad configuration values (k < 2, empty feature set, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Model file with an unknown format version or a checksum mismatch.
class ModelFormatError : public Error {
public:
    using Error::Error;
};

} // namespace tempora
