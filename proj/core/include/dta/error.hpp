#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dta {

/// Category of a library failure. The CLI maps each kind to an exit code and
/// a diagnostic prefix, so adding a kind means touching tools/ as well.
enum class ErrorKind {
  config,
  numeric,
  layout,
  decode,
  format,
  io,
  metric,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorKind::config, message) {}
};

/// Non-finite value encountered. `step` is set when raised from training.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message, std::optional<std::size_t> step = std::nullopt);

  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

class LayoutError : public Error {
 public:
  explicit LayoutError(const std::string& message) : Error(ErrorKind::layout, message) {}
};

/// Malformed image data; `offset` is the byte position where decoding stopped.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& message, std::size_t offset);

  std::size_t offset() const noexcept { return offset_; }
  /// Message without the offset suffix.
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
  std::size_t offset_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error(ErrorKind::format, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

/// A metric is undefined for the given labels (e.g. only one class present).
class MetricError : public Error {
 public:
  explicit MetricError(const std::string& message) : Error(ErrorKind::metric, message) {}
};

}  // namespace dta
