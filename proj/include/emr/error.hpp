#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emr {

/// Failure categories shared by every module. The CLI maps them onto exit
/// codes and the service onto HTTP statuses.
enum class Errc {
  // project_io
  DirNotFound,
  NotAProject,
  SyntaxError,
  MissingField,
  MissingKey,
  BadValue,
  DimensionMismatch,
  UnsupportedFormat,
  DecodeError,
  // calibration
  TooFewSamples,
  NonPositiveSample,
  BadMagnification,
  // annotate
  NonPositiveLength,
  BarTooWide,
  LayoutOverflow,
  LayoutMismatch,
  UnknownPositionId,
  UnsupportedPixelFormat,
  // compose
  NotSingleChannel,
  InvalidSettings,
  // export
  UnbalancedBrace,
  UnknownVariable,
  ForbiddenChar,
  TooLong,
  ReservedName,
  EmptyName,
  EncodeError,
  DestNotWritable,
  // generic
  IoError,
  UnknownEntry,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail, const std::string& message = {});

  Errc code() const noexcept { return code_; }

  /// The offending field, key, character or variable, when there is one.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace emr
