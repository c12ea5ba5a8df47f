#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rsvgd {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition on an argument was violated (e.g. a non-unit point on a sphere).
class precondition_error : public error {
 public:
  using error::error;
};

/// Argument shapes disagree with each other or with a manifold/kernel description.
class dimension_error : public error {
 public:
  using error::error;
};

/// Point lies outside the domain of a chart or formula.
class domain_error : public error {
 public:
  using error::error;
};

/// Matrix is too ill-conditioned to invert reliably.
class singular_matrix_error : public error {
 public:
  using error::error;
};

/// Malformed dataset or configuration text. Carries the 1-based line number.
class format_error : public error {
 public:
  format_error(std::size_t line, const std::string& what)
      : error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Embedding providers violated their invariants at a particle.
class provider_error : public error {
 public:
  provider_error(std::size_t index, const std::string& what)
      : error("particle " + std::to_string(index) + ": " + what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace rsvgd
