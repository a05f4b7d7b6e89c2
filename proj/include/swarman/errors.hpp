#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swarman {

/// Input violates a file or record schema (missing keys, wrong types, bad JSON).
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
    SchemaError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    /// 1-based line number of the offending record, 0 when not line-oriented.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A parent/child landmark pair too close together to define a direction.
class DegenerateSegment : public ValidationError {
public:
    explicit DegenerateSegment(const std::string& edge)
        : ValidationError("degenerate segment " + edge), edge_(edge) {}

    const std::string& edge() const noexcept { return edge_; }

private:
    std::string edge_;
};

/// Numerical failure during a simulation run (non-finite force or state).
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swarman
