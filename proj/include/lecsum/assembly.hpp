#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lecsum/adapter.hpp"
#include "lecsum/extraction.hpp"
#include "lecsum/media_io.hpp"
#include "lecsum/segmentation.hpp"

namespace lecsum::assembly {

using segmentation::Segment;

enum class CutMode { kBegin, kMiddle, kEnd };

std::string_view to_string(CutMode mode);
std::optional<CutMode> parse_cut_mode(std::string_view name);

struct NarrationAudio {
  fs::path path;
  TimeCode duration;
  fs::path reference_path;
};

struct VideoInterval {
  TimeRange range;
  bool freeze_overflow = false;  // narration outlasts the segment
};

struct SummaryClip {
  std::size_t segment_index = 0;
  TimeRange video_interval;
  fs::path clip_path;
  TimeCode duration;
  bool frozen_tail = false;
};

inline constexpr double kMaxReferenceSeconds = 30.0;

// Writes the longest non-silent run of `audio` (capped) to `out_path` as WAV.
// Throws Error(kPrecondition) for an empty transcript and
// Error(kNoSpeechFound) when the audio holds no speech-level run.
fs::path extract_reference_audio(const AudioBuffer& audio,
                                 const extraction::Transcript& transcript,
                                 const segmentation::SilenceParams& silence,
                                 const fs::path& out_path,
                                 double max_seconds = kMaxReferenceSeconds);

NarrationAudio synthesize_narration(const Adapter& tts, const MediaIo& media,
                                    const std::string& summary_text,
                                    const fs::path& reference, const fs::path& out_path,
                                    const Segment& segment);

VideoInterval select_video_interval(const Segment& segment, double narration_seconds,
                                    CutMode mode = CutMode::kMiddle);

SummaryClip assemble_summary_clip(const MediaIo& media, const fs::path& source,
                                  const Segment& segment, const NarrationAudio& narration,
                                  CutMode mode, const fs::path& out_path);

}  // namespace lecsum::assembly
