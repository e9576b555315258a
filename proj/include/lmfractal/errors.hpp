#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lmfractal {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (bad JSON, unreadable line). Carries the 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a record or configuration invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// No rating digit could be recovered from a quality response.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A selection matched no documents.
class EmptySelectionError : public Error {
 public:
  EmptySelectionError(const std::string& what, std::vector<std::string> available = {})
      : Error(what), available_(std::move(available)) {}
  const std::vector<std::string>& available() const noexcept { return available_; }

 private:
  std::vector<std::string> available_;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Pooled variance is zero, so the corpus cannot be standardized.
class DegenerateCorpusError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Fewer than three usable scales survived. `points` holds the per-scale
/// (scale, value) pairs that were computed, including the discarded ones.
class InsufficientScalesError : public EstimationError {
 public:
  InsufficientScalesError(const std::string& what,
                          std::vector<std::pair<double, double>> points)
      : EstimationError(what), points_(std::move(points)) {}
  const std::vector<std::pair<double, double>>& points() const noexcept { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;
};

class BootstrapError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmfractal
