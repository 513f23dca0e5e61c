#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace meshmend {

// Base for every error raised by the library.
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed mesh file. line() is 1-based; 0 when the failure is not tied to a line.
class ParseError : public MeshError {
public:
    ParseError(const std::string& message, std::size_t line)
        : MeshError(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public MeshError {
public:
    using MeshError::MeshError;
};

// A face references a vertex that does not exist.
class IndexRangeError : public MeshError {
public:
    using MeshError::MeshError;
};

// Non-finite coordinate in input.
class NonFiniteError : public MeshError {
public:
    using MeshError::MeshError;
};

// Geometry whose extent is zero (normalization of coincident points,
// degenerate triangles handed to predicates that require an area).
class DegenerateGeometryError : public MeshError {
public:
    using MeshError::MeshError;
};

// Caller-side contract violation (empty mesh, bad parameters).
class PreconditionError : public MeshError {
public:
    using MeshError::MeshError;
};

}  // namespace meshmend
