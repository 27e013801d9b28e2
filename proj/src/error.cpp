#include "froq/error.hpp"

namespace froq {

std::string_view kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidScore: return "InvalidScore";
    case ErrorKind::kShape: return "ShapeError";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kInvalidParameter: return "InvalidParameter";
    case ErrorKind::kModelFormat: return "ModelFormatError";
    case ErrorKind::kUnknownTap: return "UnknownTap";
    case ErrorKind::kImageFormat: return "ImageFormatError";
    case ErrorKind::kAlignment: return "AlignmentError";
    case ErrorKind::kCompatibility: return "CompatibilityError";
    case ErrorKind::kFormatVersion: return "FormatVersionError";
    case ErrorKind::kConfigParse: return "ConfigParseError";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kBatch: return "BatchError";
  }
  return "Error";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidScore:
    case ErrorKind::kShape:
    case ErrorKind::kDegenerateInput:
    case ErrorKind::kBatch:
      return 3;
    default:
      return 2;
  }
}

}  // namespace froq
