#include "lecsum/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lecsum/error.hpp"

namespace lecsum::segmentation {

ColorHistogram compute_histogram(const Frame& frame, int bins) {
  if (bins < 2 || bins > 256) {
    throw Error(ErrorCode::kPrecondition, "histogram bins must be in [2, 256]");
  }
  if (!frame.valid()) throw Error(ErrorCode::kPrecondition, "invalid frame");
  ColorHistogram h;
  h.bins = bins;
  h.counts.assign(static_cast<std::size_t>(3 * bins), 0);
  // bin = floor(v * bins / 256) places v in [b*256/B, (b+1)*256/B)
  std::array<std::uint8_t, 256> bin_of{};
  for (int v = 0; v < 256; ++v) bin_of[v] = static_cast<std::uint8_t>(v * bins / 256);
  const std::size_t n = frame.pixels.size() / 3;
  const std::uint8_t* p = frame.pixels.data();
  std::uint32_t* r = h.counts.data();
  std::uint32_t* g = r + bins;
  std::uint32_t* b = g + bins;
  for (std::size_t i = 0; i < n; ++i, p += 3) {
    ++r[bin_of[p[0]]];
    ++g[bin_of[p[1]]];
    ++b[bin_of[p[2]]];
  }
  h.total = n;
  return h;
}

double histogram_distance(const ColorHistogram& a, const ColorHistogram& b) {
  if (a.bins != b.bins || a.counts.size() != b.counts.size()) {
    throw Error(ErrorCode::kBinMismatch, std::to_string(a.bins) + " vs " +
                                             std::to_string(b.bins) + " bins");
  }
  if (a.total == 0 || b.total == 0) {
    throw Error(ErrorCode::kPrecondition, "histogram of an empty frame");
  }
  // |ca/ta - cb/tb| = |ca*tb - cb*ta| / (ta*tb); accumulate exactly.
  unsigned __int128 numerator = 0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    const auto x = static_cast<unsigned __int128>(a.counts[i]) * b.total;
    const auto y = static_cast<unsigned __int128>(b.counts[i]) * a.total;
    numerator += x > y ? x - y : y - x;
  }
  const long double denom = 6.0L * static_cast<long double>(a.total) *
                            static_cast<long double>(b.total);
  return static_cast<double>(static_cast<long double>(numerator) / denom);
}

SceneCutDetector::SceneCutDetector(CutParams params) : params_(params) {
  if (!(params_.threshold > 0.0 && params_.threshold <= 1.0)) {
    throw Error(ErrorCode::kPrecondition, "cut threshold must be in (0, 1]");
  }
  if (params_.min_gap < 0.0) {
    throw Error(ErrorCode::kPrecondition, "min_gap must be >= 0");
  }
}

std::optional<SceneCut> SceneCutDetector::push(const Frame& frame) {
  if (previous_time_ && frame.timestamp <= *previous_time_) {
    throw Error(ErrorCode::kPrecondition, "frame timestamps must increase");
  }
  ColorHistogram current = compute_histogram(frame, params_.bins);
  ++frames_seen_;
  std::optional<SceneCut> cut;
  if (previous_) {
    const double score = histogram_distance(*previous_, current);
    const bool far_enough =
        !last_cut_ ||
        frame.timestamp.seconds() - last_cut_->seconds() >= params_.min_gap - 1e-9;
    if (score >= params_.threshold && far_enough) {
      cut = SceneCut{frame.index, frame.timestamp, score};
      last_cut_ = frame.timestamp;
      cuts_.push_back(*cut);
    }
  }
  previous_ = std::move(current);
  previous_time_ = frame.timestamp;
  return cut;
}

std::vector<SceneCut> detect_scene_cuts(std::span<const Frame> frames,
                                        const CutParams& params) {
  if (frames.size() < 2) {
    throw Error(ErrorCode::kTooFewFrames,
                "need at least 2 frames, got " + std::to_string(frames.size()));
  }
  SceneCutDetector detector(params);
  for (const auto& f : frames) detector.push(f);
  return detector.cuts();
}

double rms_dbfs(std::span<const std::int16_t> samples) {
  if (samples.empty()) return -std::numeric_limits<double>::infinity();
  std::int64_t sum = 0;
  for (const auto s : samples) sum += static_cast<std::int64_t>(s) * s;
  if (sum == 0) return -std::numeric_limits<double>::infinity();
  const double rms = std::sqrt(static_cast<double>(sum) / static_cast<double>(samples.size()));
  return 20.0 * std::log10(rms / 32767.0);
}

std::vector<SilenceInterval> detect_silences(const AudioBuffer& audio,
                                             const SilenceParams& params) {
  if (audio.samples.empty()) throw Error(ErrorCode::kEmptyAudio, "no samples");
  if (!(params.hop > 0.0) || params.window < params.hop) {
    throw Error(ErrorCode::kPrecondition, "require window >= hop > 0");
  }
  const int rate = audio.sample_rate;
  const auto n = static_cast<std::int64_t>(audio.samples.size());
  const auto window = std::max<std::int64_t>(1, std::llround(params.window * rate));
  const auto hop = std::max<std::int64_t>(1, std::llround(params.hop * rate));
  const std::int64_t windows = n <= window ? 1 : (n - window + hop - 1) / hop + 1;

  // Prefix sums of squares make each window's energy exact and O(1).
  std::vector<std::int64_t> prefix(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t s = audio.samples[static_cast<std::size_t>(i)];
    prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + s * s;
  }
  // Compare mean square against the threshold in the linear domain.
  const double limit = 32767.0 * std::pow(10.0, params.threshold_db / 20.0);
  const double limit_sq = limit * limit;

  std::vector<SilenceInterval> out;
  std::int64_t run_start = -1;
  std::int64_t run_end = 0;
  auto close_run = [&] {
    if (run_start < 0) return;
    const double start = static_cast<double>(run_start) / rate;
    const double end = static_cast<double>(run_end) / rate;
    if (end - start >= params.min_duration - 1e-9) {
      out.push_back({TimeCode(start), TimeCode(end)});
    }
    run_start = -1;
  };
  for (std::int64_t k = 0; k < windows; ++k) {
    const std::int64_t begin = k * hop;
    const std::int64_t end = std::min(n, begin + window);
    const auto energy = prefix[static_cast<std::size_t>(end)] - prefix[static_cast<std::size_t>(begin)];
    const double mean_sq = static_cast<double>(energy) / static_cast<double>(end - begin);
    if (mean_sq < limit_sq) {
      if (run_start < 0) run_start = begin;
      run_end = end;
    } else {
      close_run();
    }
  }
  close_run();
  return out;
}

std::vector<TimeRange> non_silent_runs(const std::vector<SilenceInterval>& silences,
                                       TimeCode duration) {
  std::vector<TimeRange> runs;
  double cursor = 0.0;
  for (const auto& s : silences) {
    if (s.start.seconds() > cursor) {
      runs.push_back({TimeCode(cursor), TimeCode(std::min(s.start.seconds(), duration.seconds()))});
    }
    cursor = std::max(cursor, s.end.seconds());
  }
  if (cursor < duration.seconds()) runs.push_back({TimeCode(cursor), duration});
  return runs;
}

std::vector<Segment> fuse_boundaries(const std::vector<SceneCut>& cuts,
                                     const std::vector<SilenceInterval>& silences,
                                     TimeCode duration, double min_segment,
                                     FusionMode mode) {
  if (duration.seconds() <= 0) {
    throw Error(ErrorCode::kPrecondition, "duration must be positive");
  }
  auto contains = [](const SilenceInterval& s, double t) {
    return t >= s.start.seconds() && t <= s.end.seconds();
  };
  std::vector<double> candidates;
  for (const auto& c : cuts) {
    const double t = c.time.seconds();
    if (mode == FusionMode::kUnion ||
        std::any_of(silences.begin(), silences.end(),
                    [&](const SilenceInterval& s) { return contains(s, t); })) {
      candidates.push_back(t);
    }
  }
  if (mode == FusionMode::kUnion) {
    for (const auto& s : silences) {
      const bool has_cut = std::any_of(cuts.begin(), cuts.end(), [&](const SceneCut& c) {
        return contains(s, c.time.seconds());
      });
      if (!has_cut) candidates.push_back(s.midpoint().seconds());
    }
  }
  std::sort(candidates.begin(), candidates.end());

  const double total = duration.seconds();
  std::vector<double> bounds = {0.0};
  for (const double t : candidates) {
    if (t - bounds.back() >= min_segment && total - t >= min_segment) {
      bounds.push_back(t);
    }
  }
  bounds.push_back(total);

  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    segments.push_back({i, TimeCode(bounds[i]), TimeCode(bounds[i + 1])});
  }
  return segments;
}

int cut_detection_stride(double fps) {
  if (fps <= 15.0) return 1;
  return std::max(1, static_cast<int>(std::lround(fps / 10.0)));
}

}  // namespace lecsum::segmentation
