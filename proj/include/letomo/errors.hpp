#pragma once

#include <stdexcept>
#include <string>

namespace letomo {

/// Base class for every error raised by the toolkit. `kind()` is a stable
/// machine-readable tag used in the CLI's error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// A point lies outside the padded velocity domain.
struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error("domain", m) {}
};

/// A layer or node index is outside its valid range.
struct IndexError : Error {
    explicit IndexError(const std::string& m) : Error("index", m) {}
};

/// An operation was called with arguments it does not accept.
struct UsageError : Error {
    explicit UsageError(const std::string& m) : Error("usage", m) {}
};

/// Input data is inconsistent (unknown ids, duplicates, non-finite values).
struct DataError : Error {
    explicit DataError(const std::string& m) : Error("data", m) {}
};

/// Configuration failed schema validation.
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};

/// Degenerate geometry or arithmetic (zero-length ray, singular block).
struct ComputationError : Error {
    explicit ComputationError(const std::string& m) : Error("computation", m) {}
};

/// An iterative solver produced a non-finite iterate.
struct SolverError : Error {
    explicit SolverError(const std::string& m) : Error("solver", m) {}
};

} // namespace letomo
