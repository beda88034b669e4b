#pragma once

#include <stdexcept>
#include <string>

namespace rangemon {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid parameter or malformed configuration (bad rho, bad schedule, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dimension or block-layout mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Vertex/edge/block index out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Geometry too degenerate for a range Jacobian (near-coincident robots).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// A node update was asked to run before its required messages arrived.
class StaleDataError : public Error {
 public:
  using Error::Error;
};

// Synchronous round violation: missing, duplicate, or mistagged message.
class SyncError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure, annotated with the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rangemon
