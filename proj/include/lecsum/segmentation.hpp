#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lecsum/media_io.hpp"
#include "lecsum/timecode.hpp"

namespace lecsum::segmentation {

inline constexpr int kDefaultBins = 16;

// Per-channel RGB tallies. counts[c * bins + b] counts pixels of channel c
// whose value falls in [b * 256 / bins, (b + 1) * 256 / bins).
struct ColorHistogram {
  int bins = kDefaultBins;
  std::vector<std::uint32_t> counts;  // 3 * bins
  std::uint64_t total = 0;

  std::uint32_t at(int channel, int bin) const {
    return counts[static_cast<std::size_t>(channel * bins + bin)];
  }
};

struct SceneCut {
  std::int64_t frame_index = 0;
  TimeCode time;
  double score = 0.0;
  friend bool operator==(const SceneCut&, const SceneCut&) = default;
};

struct SilenceInterval {
  TimeCode start;
  TimeCode end;
  double length() const noexcept { return end.seconds() - start.seconds(); }
  TimeCode midpoint() const { return TimeCode((start.seconds() + end.seconds()) / 2.0); }
  friend bool operator==(const SilenceInterval&, const SilenceInterval&) = default;
};

struct Segment {
  std::size_t index = 0;
  TimeCode start;
  TimeCode end;
  double length() const noexcept { return end.seconds() - start.seconds(); }
  TimeRange range() const { return {start, end}; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class FusionMode { kUnion, kIntersection };

struct CutParams {
  double threshold = 0.4;
  double min_gap = 2.0;  // seconds
  int bins = kDefaultBins;
};

struct SilenceParams {
  double threshold_db = -40.0;
  double min_duration = 0.5;
  double window = 0.020;
  double hop = 0.010;
};

ColorHistogram compute_histogram(const Frame& frame, int bins = kDefaultBins);

// (1/6) * sum over channels and bins of |f1 - f2| on per-channel frequencies.
// Throws Error(kBinMismatch) when bin counts differ.
double histogram_distance(const ColorHistogram& a, const ColorHistogram& b);

// Single-pass detector; holds only the previous frame's histogram.
class SceneCutDetector {
 public:
  explicit SceneCutDetector(CutParams params);

  // Returns the cut reported at this frame, if any.
  std::optional<SceneCut> push(const Frame& frame);

  std::size_t frames_seen() const noexcept { return frames_seen_; }
  const std::vector<SceneCut>& cuts() const noexcept { return cuts_; }

 private:
  CutParams params_;
  std::optional<ColorHistogram> previous_;
  std::optional<TimeCode> previous_time_;
  std::optional<TimeCode> last_cut_;
  std::size_t frames_seen_ = 0;
  std::vector<SceneCut> cuts_;
};

// Throws Error(kTooFewFrames) for fewer than two frames and
// Error(kPrecondition) for non-increasing timestamps.
std::vector<SceneCut> detect_scene_cuts(std::span<const Frame> frames,
                                        const CutParams& params);

// dBFS of the RMS of `samples` (full scale 32767); -inf for silence.
double rms_dbfs(std::span<const std::int16_t> samples);

// Windowed-RMS silence detection. Windows start every `hop`; the final window
// is clipped at the end of the buffer so the last window always ends there.
// Throws Error(kEmptyAudio) on an empty buffer.
std::vector<SilenceInterval> detect_silences(const AudioBuffer& audio,
                                             const SilenceParams& params);

// Complement of `silences` within [0, duration].
std::vector<TimeRange> non_silent_runs(const std::vector<SilenceInterval>& silences,
                                       TimeCode duration);

// Union mode: candidates are cut times plus midpoints of silences that contain
// no cut (a cut inside a silence wins). Intersection mode: only cuts that fall
// inside a silence interval. Candidates are accepted greedily left to right
// when at least min_segment from the previous boundary and from `duration`.
std::vector<Segment> fuse_boundaries(const std::vector<SceneCut>& cuts,
                                     const std::vector<SilenceInterval>& silences,
                                     TimeCode duration, double min_segment,
                                     FusionMode mode = FusionMode::kUnion);

// Frame stride for cut detection: 1 up to 15 fps, otherwise about 10 fps.
int cut_detection_stride(double fps);

}  // namespace lecsum::segmentation
