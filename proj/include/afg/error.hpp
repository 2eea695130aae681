#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace afg {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration: unknown column, missing path, bad range table.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Parse failure at a known line of an input stream (1-based).
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A function was called outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Zero-width score range, zero variance, zero answer key and similar.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// An answer key applied to a submission for a different paper.
class KeyMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class DivergedError : public Error {
 public:
  explicit DivergedError(std::size_t step)
      : Error("training diverged (non-finite loss) at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Model file problems. Each failure mode has its own type so callers can
// tell a wrong file from a damaged one.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};
class ModelVersionError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class ModelShapeError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class ModelCorruptError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

}  // namespace afg
