#pragma once

#include <stdexcept>
#include <string>

namespace kinehier {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto its exit-code contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class LimitViolationError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class IndexError : public Error { using Error::Error; };
class EmptyPartError : public Error { using Error::Error; };
class StructuralError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class TrainingDataError : public Error { using Error::Error; };

class IoError : public Error {
public:
    IoError(const std::string& what, std::string path)
        : Error(what + ": " + path), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Malformed or truncated on-disk data.
class CorruptDataError : public Error {
public:
    CorruptDataError(const std::string& what, long record_index = -1)
        : Error(what), record_index_(record_index) {}
    long record_index() const noexcept { return record_index_; }

private:
    long record_index_;
};

class VersionMismatchError : public Error { using Error::Error; };

} // namespace kinehier
