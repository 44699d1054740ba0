#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sstem {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidManifest,
  kUnreadableVideo,
  kEmptyVideo,
  kIdMismatch,
  kCacheIo,
  kBackendUnavailable,
  kInferenceFailed,
  kExtractionEmpty,
  kObjectQueryFailed,
  kTooFewFrames,
  kRankDeficient,
  kTooFewSamples,
  kUnsplitVideo,
  kDegenerateSeries,
  kAlignmentError,
  kUnknownFormat,
  kOutOfRange,
  kUnknownVideo,
  kUnknownDataset,
  kParseError,
  kIoError,
};

// Stable upper-case name, e.g. "TOO_FEW_FRAMES". Used in wire formats and logs.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // Same code, message prefixed with `context: `.
  Error with_context(std::string_view context) const;

 private:
  ErrorCode code_;
};

}  // namespace sstem
