#include "sstem/error.hpp"

namespace sstem {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kInvalidManifest: return "INVALID_MANIFEST";
    case ErrorCode::kUnreadableVideo: return "UNREADABLE_VIDEO";
    case ErrorCode::kEmptyVideo: return "EMPTY_VIDEO";
    case ErrorCode::kIdMismatch: return "ID_MISMATCH";
    case ErrorCode::kCacheIo: return "CACHE_IO";
    case ErrorCode::kBackendUnavailable: return "BACKEND_UNAVAILABLE";
    case ErrorCode::kInferenceFailed: return "INFERENCE_FAILED";
    case ErrorCode::kExtractionEmpty: return "EXTRACTION_EMPTY";
    case ErrorCode::kObjectQueryFailed: return "OBJECT_QUERY_FAILED";
    case ErrorCode::kTooFewFrames: return "TOO_FEW_FRAMES";
    case ErrorCode::kRankDeficient: return "RANK_DEFICIENT";
    case ErrorCode::kTooFewSamples: return "TOO_FEW_SAMPLES";
    case ErrorCode::kUnsplitVideo: return "UNSPLIT_VIDEO";
    case ErrorCode::kDegenerateSeries: return "DEGENERATE_SERIES";
    case ErrorCode::kAlignmentError: return "ALIGNMENT_ERROR";
    case ErrorCode::kUnknownFormat: return "UNKNOWN_FORMAT";
    case ErrorCode::kOutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::kUnknownVideo: return "UNKNOWN_VIDEO";
    case ErrorCode::kUnknownDataset: return "UNKNOWN_DATASET";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kIoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error Error::with_context(std::string_view context) const {
  // what() already carries the code prefix; strip it so it is not repeated.
  std::string_view msg = what();
  const auto prefix = std::string(to_string(code_)) + ": ";
  if (msg.starts_with(prefix)) msg.remove_prefix(prefix.size());
  return Error(code_, std::string(context) + ": " + std::string(msg));
}

}  // namespace sstem
