#include "emr/error.hpp"

namespace emr {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DirNotFound: return "DirNotFound";
    case Errc::NotAProject: return "NotAProject";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::MissingField: return "MissingField";
    case Errc::MissingKey: return "MissingKey";
    case Errc::BadValue: return "BadValue";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::DecodeError: return "DecodeError";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NonPositiveSample: return "NonPositiveSample";
    case Errc::BadMagnification: return "BadMagnification";
    case Errc::NonPositiveLength: return "NonPositiveLength";
    case Errc::BarTooWide: return "BarTooWide";
    case Errc::LayoutOverflow: return "LayoutOverflow";
    case Errc::LayoutMismatch: return "LayoutMismatch";
    case Errc::UnknownPositionId: return "UnknownPositionId";
    case Errc::UnsupportedPixelFormat: return "UnsupportedPixelFormat";
    case Errc::NotSingleChannel: return "NotSingleChannel";
    case Errc::InvalidSettings: return "InvalidSettings";
    case Errc::UnbalancedBrace: return "UnbalancedBrace";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::ForbiddenChar: return "ForbiddenChar";
    case Errc::TooLong: return "TooLong";
    case Errc::ReservedName: return "ReservedName";
    case Errc::EmptyName: return "EmptyName";
    case Errc::EncodeError: return "EncodeError";
    case Errc::DestNotWritable: return "DestNotWritable";
    case Errc::IoError: return "IoError";
    case Errc::UnknownEntry: return "UnknownEntry";
  }
  return "Unknown";
}

static std::string compose_message(Errc code, const std::string& detail, const std::string& message) {
  std::string out(to_string(code));
  if (!detail.empty()) out += "(" + detail + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

Error::Error(Errc code, std::string detail, const std::string& message)
    : std::runtime_error(compose_message(code, detail, message)), code_(code), detail_(std::move(detail)) {}

}  // namespace emr
