#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lecsum {

enum class ErrorCode {
  kFileNotFound,
  kDecoderUnavailable,
  kEncoderUnavailable,
  kMuxerUnavailable,
  kUnreadableMedia,
  kRangeOutOfBounds,
  kWriteFailed,
  kPrecondition,
  kBinMismatch,
  kTooFewFrames,
  kEmptyAudio,
  kAdapterFailure,
  kAdapterTimeout,
  kInconsistentSegment,
  kEmptySummary,
  kNoSpeechFound,
  kDurationMismatch,
  kMissingArtifact,
  kSchemaVersionMismatch,
  kCorruptManifest,
  kEmptyQuery,
  kInvalidConfig,
  kOutputExists,
};

std::string_view error_code_name(ErrorCode code);

// Every failure the library raises carries one of the codes above so callers
// (the pipeline's degradation logic, the CLI's exit status) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by catalog::build_manifest when a referenced file is absent.
class MissingArtifactError : public Error {
 public:
  MissingArtifactError(std::size_t segment_index, std::string artifact,
                       const std::string& path)
      : Error(ErrorCode::kMissingArtifact,
              "segment " + std::to_string(segment_index) + " " + artifact +
                  " (" + path + ")"),
        segment_index_(segment_index),
        artifact_(std::move(artifact)) {}

  std::size_t segment_index() const noexcept { return segment_index_; }
  const std::string& artifact() const noexcept { return artifact_; }

 private:
  std::size_t segment_index_;
  std::string artifact_;
};

}  // namespace lecsum
