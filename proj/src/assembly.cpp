#include "lecsum/assembly.hpp"

#include <cmath>

#include "lecsum/error.hpp"
#include "lecsum/wav.hpp"

namespace lecsum::assembly {

std::string_view to_string(CutMode mode) {
  switch (mode) {
    case CutMode::kBegin: return "begin";
    case CutMode::kMiddle: return "middle";
    case CutMode::kEnd: return "end";
  }
  return "middle";
}

std::optional<CutMode> parse_cut_mode(std::string_view name) {
  for (auto m : {CutMode::kBegin, CutMode::kMiddle, CutMode::kEnd}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

fs::path extract_reference_audio(const AudioBuffer& audio,
                                 const extraction::Transcript& transcript,
                                 const segmentation::SilenceParams& silence,
                                 const fs::path& out_path, double max_seconds) {
  if (transcript.word_count == 0) {
    throw Error(ErrorCode::kPrecondition, "reference audio needs a non-empty transcript");
  }
  if (audio.samples.empty()) throw Error(ErrorCode::kNoSpeechFound, "audio is empty");
  const auto silences = segmentation::detect_silences(audio, silence);
  const auto runs = segmentation::non_silent_runs(silences, audio.duration());
  const TimeRange* best = nullptr;
  for (const auto& r : runs) {
    if (best == nullptr || r.length() > best->length()) best = &r;
  }
  if (best == nullptr || best->length() <= 0) {
    throw Error(ErrorCode::kNoSpeechFound, "no non-silent run in segment audio");
  }
  const double end = std::min(best->end.seconds(), best->start.seconds() + max_seconds);
  const AudioBuffer clip = audio.slice({best->start, TimeCode(end)});
  wav::write(out_path, clip.sample_rate, 1, clip.samples);
  return out_path;
}

NarrationAudio synthesize_narration(const Adapter& tts, const MediaIo& media,
                                    const std::string& summary_text,
                                    const fs::path& reference, const fs::path& out_path,
                                    const Segment& segment) {
  if (extraction::count_words(summary_text) == 0) {
    throw Error(ErrorCode::kPrecondition, "narration text is empty");
  }
  const nlohmann::json request = {{"text", summary_text},
                                  {"reference_audio_path", reference.string()},
                                  {"out_path", out_path.string()},
                                  {"context", extraction::request_context(segment)}};
  const nlohmann::json response = tts.invoke(request);
  const auto path_it = response.find("audio_path");
  if (path_it == response.end() || !path_it->is_string()) {
    throw Error(ErrorCode::kAdapterFailure, "tts malformed response: no audio_path");
  }
  const fs::path audio_path = path_it->get<std::string>();
  std::error_code ec;
  if (!fs::is_regular_file(audio_path, ec)) {
    throw Error(ErrorCode::kAdapterFailure, "tts wrote no file at " + audio_path.string());
  }
  TimeCode duration;
  try {
    duration = media.audio_duration(audio_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kAdapterFailure, std::string("tts output unreadable: ") + e.what());
  }
  if (duration.seconds() <= 0) {
    throw Error(ErrorCode::kAdapterFailure, "tts produced zero-length audio");
  }
  return NarrationAudio{audio_path, duration, reference};
}

VideoInterval select_video_interval(const Segment& segment, double narration_seconds,
                                    CutMode mode) {
  if (!(narration_seconds > 0)) {
    throw Error(ErrorCode::kPrecondition, "narration duration must be positive");
  }
  const double start = segment.start.seconds();
  const double end = segment.end.seconds();
  const double length = end - start;
  if (!(length > 0)) throw Error(ErrorCode::kPrecondition, "segment has zero length");
  if (narration_seconds >= length) {
    return {{segment.start, segment.end}, narration_seconds > length};
  }
  switch (mode) {
    case CutMode::kBegin:
      return {{TimeCode(start), TimeCode(start + narration_seconds)}, false};
    case CutMode::kEnd:
      return {{TimeCode(end - narration_seconds), TimeCode(end)}, false};
    case CutMode::kMiddle:
      break;
  }
  const double slack = (length - narration_seconds) / 2.0;
  return {{TimeCode(start + slack), TimeCode(start + slack + narration_seconds)}, false};
}

SummaryClip assemble_summary_clip(const MediaIo& media, const fs::path& source,
                                  const Segment& segment, const NarrationAudio& narration,
                                  CutMode mode, const fs::path& out_path) {
  if (narration.duration.seconds() <= 0) {
    throw Error(ErrorCode::kPrecondition, "narration has zero length");
  }
  const VideoInterval interval = select_video_interval(segment, narration.duration.seconds(), mode);
  const MuxResult mux = media.mux_clip(source, interval.range, narration.path, out_path);
  return SummaryClip{segment.index, interval.range, mux.path, mux.duration,
                     interval.freeze_overflow};
}

}  // namespace lecsum::assembly
