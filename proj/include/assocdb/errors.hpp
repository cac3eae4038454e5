#pragma once

#include <stdexcept>
#include <string>

namespace assocdb {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KeyListError : public Error {
 public:
  using Error::Error;
};

// Parallel input lists of unequal length.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Numeric/string value mode mismatch, or an operation not defined for a mode.
class ModeError : public Error {
 public:
  using Error::Error;
};

class TableNotFound : public Error {
 public:
  explicit TableNotFound(const std::string& name) : Error("no such table: " + name) {}
};

class TableConflict : public Error {
 public:
  using Error::Error;
};

// Malformed snapshot, TSV or CSV input, or an I/O failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedQuery : public Error {
 public:
  using Error::Error;
};

class BenchError : public Error {
 public:
  using Error::Error;
};

}  // namespace assocdb
