#include "dta/error.hpp"

namespace dta {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::layout: return "layout";
    case ErrorKind::decode: return "decode";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
    case ErrorKind::metric: return "metric";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

NumericError::NumericError(const std::string& message, std::optional<std::size_t> step)
    : Error(ErrorKind::numeric,
            step ? message + " (training step " + std::to_string(*step) + ")" : message),
      step_(step) {}

DecodeError::DecodeError(const std::string& message, std::size_t offset)
    : Error(ErrorKind::decode, message + " at byte offset " + std::to_string(offset)), reason_(message), offset_(offset) {}

}  // namespace dta
