#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ffdyn {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Incompatible matrix/vector shapes. Message names both shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Bad argument to an operation (label out of range, empty batch, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Malformed IDX file. kind() distinguishes the failure modes the data
// contract cares about.
class IdxError : public Error {
public:
    enum class Kind { bad_magic, truncated, count_mismatch, io };

    IdxError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Invalid experiment configuration; message names the violated invariant.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable or incompatible network checkpoint.
class CheckpointError : public Error {
public:
    using Error::Error;
};

// Malformed metrics CSV.
class CsvError : public Error {
public:
    using Error::Error;
};

// Undefined statistic (constant series, too few pairs, inconsistent
// epoch coverage). Reported explicitly instead of yielding NaN or 0.
class StatError : public Error {
public:
    using Error::Error;
};

// Non-finite loss during training. Names the layer (1-based, 0 meaning
// the downstream head) and, once known, the epoch.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t layer_index, const std::string& message)
        : Error(message), layer_index_(layer_index) {}
    DivergenceError(std::size_t layer_index, std::size_t epoch, const std::string& message)
        : Error(message), layer_index_(layer_index), epoch_(epoch) {}

    std::size_t layer_index() const { return layer_index_; }
    std::optional<std::size_t> epoch() const { return epoch_; }

private:
    std::size_t layer_index_;
    std::optional<std::size_t> epoch_;
};

}  // namespace ffdyn
