#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lecsum/adapter.hpp"
#include "lecsum/media_io.hpp"
#include "lecsum/segmentation.hpp"

namespace lecsum::extraction {

using segmentation::Segment;

// Whitespace-token count.
std::size_t count_words(std::string_view text);

struct TranscriptPiece {
  std::string text;
  TimeCode start;  // absolute source time
  TimeCode end;
  friend bool operator==(const TranscriptPiece&, const TranscriptPiece&) = default;
};

struct Transcript {
  std::size_t segment_index = 0;
  std::vector<TranscriptPiece> pieces;
  std::size_t word_count = 0;  // L_t

  // Pieces joined by single spaces.
  std::string text() const;
};

struct OcrResult {
  std::size_t segment_index = 0;
  std::vector<std::vector<std::string>> frame_lines;
  std::string deduplicated_text;
  std::size_t word_count = 0;  // L_c
};

struct ObjectLabel {
  std::string name;
  double confidence = 0.0;
  friend bool operator==(const ObjectLabel&, const ObjectLabel&) = default;
};

enum class ObjectCountMode { kDistinct, kPerFrameSum };

struct ObjectSet {
  std::size_t segment_index = 0;
  std::vector<std::vector<ObjectLabel>> frame_labels;
  double confidence_floor = 0.5;
  ObjectCountMode mode = ObjectCountMode::kDistinct;
  std::size_t distinct_count = 0;  // L_o

  // Sorted distinct names at or above the floor.
  std::vector<std::string> distinct_labels() const;
};

struct SegmentEvidence {
  Segment segment;
  Transcript transcript;
  OcrResult ocr;
  ObjectSet objects;
};

struct KeyframePolicy {
  double interval = 2.0;  // seconds between keyframes
};

// Keyframes sampled for one segment, with their images on disk.
struct KeyframeSet {
  std::vector<Frame> frames;
  std::vector<fs::path> images;
};

// Times on a grid of `interval` anchored at the segment midpoint, restricted
// to [start, end). Always contains the midpoint.
std::vector<TimeCode> keyframe_times(const Segment& segment, const KeyframePolicy& policy);

// Decodes the keyframes of `segment` and writes them as images in `work_dir`.
KeyframeSet sample_keyframes(const MediaIo& media, const fs::path& source,
                             const MediaInfo& info, const Segment& segment,
                             const KeyframePolicy& policy, const fs::path& work_dir);

// Applies the OCR dedup rule: a line repeated from the previous keyframe is
// dropped; blank lines are ignored.
OcrResult merge_ocr(std::size_t segment_index,
                    std::vector<std::vector<std::string>> frame_lines);

ObjectSet merge_objects(std::size_t segment_index,
                        std::vector<std::vector<ObjectLabel>> frame_labels,
                        double confidence_floor, ObjectCountMode mode);

std::size_t count_objects(const std::vector<std::vector<ObjectLabel>>& frame_labels,
                          double confidence_floor, ObjectCountMode mode);

// Writes the segment audio to `work_dir` and asks the ASR adapter for text.
Transcript transcribe(const Adapter& asr, const AudioBuffer& segment_audio,
                      const Segment& segment, const fs::path& work_dir);

// Parses an ASR response; times are relative to the segment start.
Transcript parse_transcript(const nlohmann::json& response, const Segment& segment);

OcrResult ocr_segment(const Adapter& ocr, const KeyframeSet& keyframes,
                      const Segment& segment);

ObjectSet detect_objects(const Adapter& detector, const KeyframeSet& keyframes,
                         const Segment& segment, double confidence_floor,
                         ObjectCountMode mode);

// Packs the evidence after re-deriving every count; throws
// Error(kInconsistentSegment) if a child belongs elsewhere or disagrees.
SegmentEvidence aggregate_evidence(const Segment& segment, Transcript transcript,
                                   OcrResult ocr, ObjectSet objects);

nlohmann::json request_context(const Segment& segment);

}  // namespace lecsum::extraction
