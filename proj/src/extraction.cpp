#include "lecsum/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "lecsum/error.hpp"
#include "lecsum/wav.hpp"

namespace lecsum::extraction {
namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string numbered(std::string_view stem, std::size_t a, std::size_t b,
                     std::string_view ext) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.*s_%03zu_%03zu.%.*s", static_cast<int>(stem.size()),
                stem.data(), a, b, static_cast<int>(ext.size()), ext.data());
  return buf;
}

[[noreturn]] void malformed(AdapterKind kind, const std::string& why) {
  throw Error(ErrorCode::kAdapterFailure,
              std::string(to_string(kind)) + " malformed response: " + why);
}

json image_request(const KeyframeSet& keyframes, const Segment& segment) {
  json paths = json::array();
  json stamps = json::array();
  for (std::size_t i = 0; i < keyframes.images.size(); ++i) {
    paths.push_back(keyframes.images[i].string());
    stamps.push_back(keyframes.frames[i].timestamp.seconds());
  }
  json ctx = request_context(segment);
  ctx["timestamps"] = stamps;
  return {{"image_paths", paths}, {"context", ctx}};
}

const json& frames_of(const json& response, AdapterKind kind, std::size_t expected) {
  if (!response.contains("frames") || !response["frames"].is_array()) {
    malformed(kind, "missing 'frames' array");
  }
  const auto& frames = response["frames"];
  if (frames.size() != expected) {
    malformed(kind, "expected " + std::to_string(expected) + " frames, got " +
                        std::to_string(frames.size()));
  }
  return frames;
}

}  // namespace

std::size_t count_words(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (const char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

std::string Transcript::text() const {
  std::string out;
  for (const auto& p : pieces) {
    if (!out.empty()) out += ' ';
    out += p.text;
  }
  return out;
}

std::vector<std::string> ObjectSet::distinct_labels() const {
  std::set<std::string> names;
  for (const auto& frame : frame_labels) {
    for (const auto& l : frame) {
      if (l.confidence >= confidence_floor) names.insert(l.name);
    }
  }
  return {names.begin(), names.end()};
}

std::vector<TimeCode> keyframe_times(const Segment& segment, const KeyframePolicy& policy) {
  if (!(policy.interval > 0.0)) {
    throw Error(ErrorCode::kPrecondition, "keyframe interval must be positive");
  }
  const double start = segment.start.seconds();
  const double end = segment.end.seconds();
  const double mid = (start + end) / 2.0;
  const double half_span = (end - start) / (2.0 * policy.interval);
  const auto lo = static_cast<long long>(std::ceil(-half_span - 1e-9));
  const auto hi = static_cast<long long>(std::ceil(half_span - 1e-9)) - 1;
  std::vector<TimeCode> times;
  for (long long j = lo; j <= std::max(hi, 0LL); ++j) {
    const double t = std::clamp(mid + static_cast<double>(j) * policy.interval, start, end);
    times.emplace_back(t);
  }
  return times;
}

KeyframeSet sample_keyframes(const MediaIo& media, const fs::path& source,
                             const MediaInfo& info, const Segment& segment,
                             const KeyframePolicy& policy, const fs::path& work_dir) {
  KeyframeSet set;
  const double frame_span = 1.5 / info.fps;
  const double limit = info.duration.seconds();
  std::size_t ordinal = 0;
  for (const TimeCode t : keyframe_times(segment, policy)) {
    const double from = std::min(t.seconds(), limit);
    const TimeRange range{TimeCode(from), TimeCode(std::min(limit, from + frame_span))};
    std::optional<Frame> picked;
    media.for_each_frame(source, info, range, 1, [&](Frame&& f) {
      if (!picked) picked = std::move(f);
    });
    if (!picked) continue;
    const fs::path image =
        work_dir / numbered("keyframe", segment.index, ordinal++, media.config().image_format);
    media.write_frame_image(*picked, image);
    set.frames.push_back(std::move(*picked));
    set.images.push_back(image);
  }
  return set;
}

OcrResult merge_ocr(std::size_t segment_index,
                    std::vector<std::vector<std::string>> frame_lines) {
  OcrResult result;
  result.segment_index = segment_index;
  std::set<std::string> previous;
  std::string text;
  for (const auto& lines : frame_lines) {
    std::set<std::string> current;
    for (const auto& raw : lines) {
      std::string line = trim(raw);
      if (line.empty()) continue;
      current.insert(line);
      if (previous.count(line) != 0) continue;
      if (!text.empty()) text += '\n';
      text += line;
    }
    previous = std::move(current);
  }
  result.frame_lines = std::move(frame_lines);
  result.deduplicated_text = std::move(text);
  result.word_count = count_words(result.deduplicated_text);
  return result;
}

std::size_t count_objects(const std::vector<std::vector<ObjectLabel>>& frame_labels,
                          double confidence_floor, ObjectCountMode mode) {
  if (mode == ObjectCountMode::kDistinct) {
    std::set<std::string> names;
    for (const auto& frame : frame_labels) {
      for (const auto& l : frame) {
        if (l.confidence >= confidence_floor) names.insert(l.name);
      }
    }
    return names.size();
  }
  std::size_t total = 0;
  for (const auto& frame : frame_labels) {
    std::set<std::string> names;
    for (const auto& l : frame) {
      if (l.confidence >= confidence_floor) names.insert(l.name);
    }
    total += names.size();
  }
  return total;
}

ObjectSet merge_objects(std::size_t segment_index,
                        std::vector<std::vector<ObjectLabel>> frame_labels,
                        double confidence_floor, ObjectCountMode mode) {
  ObjectSet set;
  set.segment_index = segment_index;
  set.confidence_floor = confidence_floor;
  set.mode = mode;
  set.distinct_count = count_objects(frame_labels, confidence_floor, mode);
  set.frame_labels = std::move(frame_labels);
  return set;
}

json request_context(const Segment& segment) {
  return {{"segment_index", segment.index},
          {"start", segment.start.seconds()},
          {"end", segment.end.seconds()}};
}

Transcript parse_transcript(const json& response, const Segment& segment) {
  if (!response.contains("segments") || !response["segments"].is_array()) {
    malformed(AdapterKind::kAsr, "missing 'segments' array");
  }
  Transcript t;
  t.segment_index = segment.index;
  const double base = segment.start.seconds();
  const double length = segment.length();
  try {
    for (const auto& item : response["segments"]) {
      std::string text = trim(item.at("text").get<std::string>());
      if (text.empty()) continue;
      const double rel_start = std::clamp(item.value("start", 0.0), 0.0, length);
      const double rel_end = std::clamp(item.value("end", rel_start), rel_start, length);
      t.pieces.push_back({std::move(text), TimeCode(base + rel_start), TimeCode(base + rel_end)});
    }
  } catch (const json::exception& e) {
    malformed(AdapterKind::kAsr, e.what());
  }
  std::stable_sort(t.pieces.begin(), t.pieces.end(),
                   [](const auto& a, const auto& b) { return a.start < b.start; });
  t.word_count = count_words(t.text());
  return t;
}

Transcript transcribe(const Adapter& asr, const AudioBuffer& segment_audio,
                      const Segment& segment, const fs::path& work_dir) {
  const fs::path audio_path = work_dir / numbered("speech", segment.index, 0, "wav");
  wav::write(audio_path, segment_audio.sample_rate, 1, segment_audio.samples);
  const json request = {{"audio_path", audio_path.string()},
                        {"sample_rate", segment_audio.sample_rate},
                        {"context", request_context(segment)}};
  return parse_transcript(asr.invoke(request), segment);
}

OcrResult ocr_segment(const Adapter& ocr, const KeyframeSet& keyframes,
                      const Segment& segment) {
  if (keyframes.images.empty()) return merge_ocr(segment.index, {});
  const json response = ocr.invoke(image_request(keyframes, segment));
  std::vector<std::vector<std::string>> lines;
  try {
    for (const auto& frame : frames_of(response, AdapterKind::kOcr, keyframes.images.size())) {
      lines.push_back(frame.value("lines", std::vector<std::string>{}));
    }
  } catch (const json::exception& e) {
    malformed(AdapterKind::kOcr, e.what());
  }
  return merge_ocr(segment.index, std::move(lines));
}

ObjectSet detect_objects(const Adapter& detector, const KeyframeSet& keyframes,
                         const Segment& segment, double confidence_floor,
                         ObjectCountMode mode) {
  if (keyframes.images.empty()) return merge_objects(segment.index, {}, confidence_floor, mode);
  const json response = detector.invoke(image_request(keyframes, segment));
  std::vector<std::vector<ObjectLabel>> labels;
  try {
    for (const auto& frame :
         frames_of(response, AdapterKind::kObjDet, keyframes.images.size())) {
      std::vector<ObjectLabel> current;
      for (const auto& l : frame.value("labels", json::array())) {
        current.push_back({l.at("name").get<std::string>(), l.at("confidence").get<double>()});
      }
      labels.push_back(std::move(current));
    }
  } catch (const json::exception& e) {
    malformed(AdapterKind::kObjDet, e.what());
  }
  return merge_objects(segment.index, std::move(labels), confidence_floor, mode);
}

SegmentEvidence aggregate_evidence(const Segment& segment, Transcript transcript,
                                   OcrResult ocr, ObjectSet objects) {
  auto inconsistent = [&](const std::string& what) {
    return Error(ErrorCode::kInconsistentSegment,
                 "segment " + std::to_string(segment.index) + ": " + what);
  };
  if (transcript.segment_index != segment.index) throw inconsistent("transcript belongs elsewhere");
  if (ocr.segment_index != segment.index) throw inconsistent("OCR result belongs elsewhere");
  if (objects.segment_index != segment.index) throw inconsistent("object set belongs elsewhere");
  for (const auto& p : transcript.pieces) {
    if (p.start < segment.start || p.end > segment.end || p.end < p.start) {
      throw inconsistent("transcript piece outside segment bounds");
    }
  }
  if (count_words(transcript.text()) != transcript.word_count) throw inconsistent("L_t mismatch");
  if (count_words(ocr.deduplicated_text) != ocr.word_count) throw inconsistent("L_c mismatch");
  if (count_objects(objects.frame_labels, objects.confidence_floor, objects.mode) !=
      objects.distinct_count) {
    throw inconsistent("L_o mismatch");
  }
  return SegmentEvidence{segment, std::move(transcript), std::move(ocr), std::move(objects)};
}

}  // namespace lecsum::extraction
