#include "lecsum/timecode.hpp"

#include <cmath>
#include <cstdio>

#include "lecsum/error.hpp"

namespace lecsum {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kDecoderUnavailable: return "DecoderUnavailable";
    case ErrorCode::kEncoderUnavailable: return "EncoderUnavailable";
    case ErrorCode::kMuxerUnavailable: return "MuxerUnavailable";
    case ErrorCode::kUnreadableMedia: return "UnreadableMedia";
    case ErrorCode::kRangeOutOfBounds: return "RangeOutOfBounds";
    case ErrorCode::kWriteFailed: return "WriteFailed";
    case ErrorCode::kPrecondition: return "PreconditionFailed";
    case ErrorCode::kBinMismatch: return "BinMismatch";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kAdapterFailure: return "AdapterFailure";
    case ErrorCode::kAdapterTimeout: return "AdapterTimeout";
    case ErrorCode::kInconsistentSegment: return "InconsistentSegment";
    case ErrorCode::kEmptySummary: return "EmptySummary";
    case ErrorCode::kNoSpeechFound: return "NoSpeechFound";
    case ErrorCode::kDurationMismatch: return "DurationMismatch";
    case ErrorCode::kMissingArtifact: return "MissingArtifact";
    case ErrorCode::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::kCorruptManifest: return "CorruptManifest";
    case ErrorCode::kEmptyQuery: return "EmptyQuery";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kOutputExists: return "OutputExists";
  }
  return "Unknown";
}

TimeCode::TimeCode(double seconds) : seconds_(seconds) {
  if (!(seconds >= 0.0) || !std::isfinite(seconds)) {
    throw Error(ErrorCode::kPrecondition,
                "time code must be finite and non-negative, got " +
                    std::to_string(seconds));
  }
}

std::string TimeCode::to_string() const {
  const auto total_ms = static_cast<long long>(std::llround(seconds_ * 1000.0));
  const long long h = total_ms / 3'600'000;
  const long long m = (total_ms / 60'000) % 60;
  const long long s = (total_ms / 1000) % 60;
  const long long ms = total_ms % 1000;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld.%03lld", h, m, s, ms);
  return buf;
}

}  // namespace lecsum
