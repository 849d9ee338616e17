#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kgf {

enum class ErrorKind {
  ShapeMismatch,
  NotPositive,
  NotStrictlyNonzero,
  ToleranceConflict,
  NotCoisometry,
  NotCommuting,
  NoInclusion,
  SingularFrameOperator,
  AllSamplesDegenerate,
  HypothesisFailed,
  IndexOutOfRange,
  EmptyInput,
  ParseError,
  UnknownKind,
};

std::string_view to_string(ErrorKind kind);

/// Base error for every recoverable failure raised by the library.
class FrameError : public std::runtime_error {
 public:
  FrameError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::NotStrictlyNonzero: return "NotStrictlyNonzero";
    case ErrorKind::ToleranceConflict: return "ToleranceConflict";
    case ErrorKind::NotCoisometry: return "NotCoisometry";
    case ErrorKind::NotCommuting: return "NotCommuting";
    case ErrorKind::NoInclusion: return "NoInclusion";
    case ErrorKind::SingularFrameOperator: return "SingularFrameOperator";
    case ErrorKind::AllSamplesDegenerate: return "AllSamplesDegenerate";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKind: return "UnknownKind";
  }
  return "Unknown";
}

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw FrameError(ErrorKind::ShapeMismatch, what);
}

}  // namespace kgf
