#include "lecsum/media_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "lecsum/error.hpp"
#include "lecsum/image.hpp"
#include "lecsum/subprocess.hpp"
#include "lecsum/wav.hpp"

namespace lecsum {
namespace {

using json = nlohmann::json;

constexpr double kTimeEpsilon = 1e-6;

// Maps a spawn failure onto the boundary's "tool unavailable" error.
[[noreturn]] void rethrow_spawn(const SpawnFailure& e, ErrorCode unavailable,
                                const std::string& what) {
  throw Error(unavailable, what + ": " + e.what());
}

double parse_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      const double num = std::stod(s.substr(0, slash));
      const double den = std::stod(s.substr(slash + 1));
      return den != 0 ? num / den : 0.0;
    }
    return std::stod(s);
  }
  return 0.0;
}

std::string trim_tail(const std::string& s, std::size_t max = 400) {
  return s.size() > max ? s.substr(0, max) + "..." : s;
}

void check_range(const TimeRange& range, const MediaInfo& info) {
  if (range.start > range.end) {
    throw Error(ErrorCode::kRangeOutOfBounds,
                "range start " + format_seconds(range.start.seconds()) +
                    " after end " + format_seconds(range.end.seconds()));
  }
  if (range.end.seconds() > info.duration.seconds() + 1e-3) {
    throw Error(ErrorCode::kRangeOutOfBounds,
                "range end " + format_seconds(range.end.seconds()) +
                    " beyond duration " + format_seconds(info.duration.seconds()));
  }
}

}  // namespace

AudioBuffer AudioBuffer::slice(const TimeRange& range) const {
  AudioBuffer out;
  out.sample_rate = sample_rate;
  const auto n = samples.size();
  const auto begin = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(range.start.seconds() * sample_rate)));
  const auto end = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(range.end.seconds() * sample_rate)), begin, n);
  out.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

std::int64_t first_frame_at_or_after(double t, double fps) {
  return static_cast<std::int64_t>(std::ceil(t * fps - kTimeEpsilon));
}

std::string format_seconds(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", seconds);
  return buf;
}

MediaIo::MediaIo(MediaToolsConfig config) : config_(std::move(config)) {}

MediaInfo MediaIo::probe(const fs::path& path) const {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  const Argv argv = expand_command(config_.probe_command, {{"input", path.string()}});
  CommandResult result;
  try {
    result = run_command(argv, {}, config_.probe_timeout);
  } catch (const SpawnFailure& e) {
    rethrow_spawn(e, ErrorCode::kDecoderUnavailable, "probe");
  } catch (const ProcessTimeout&) {
    throw Error(ErrorCode::kUnreadableMedia, "probe timed out on " + path.string());
  }
  if (!result.status.ok()) {
    throw Error(ErrorCode::kUnreadableMedia,
                path.string() + ": " + trim_tail(result.err));
  }

  MediaInfo info;
  try {
    const json doc = json::parse(result.out);
    double duration = 0.0;
    if (doc.contains("format") && doc["format"].contains("duration")) {
      duration = parse_number(doc["format"]["duration"]);
    }
    for (const auto& stream : doc.value("streams", json::array())) {
      const auto type = stream.value("codec_type", std::string());
      if (type == "video" && !info.has_video()) {
        info.width = stream.value("width", 0);
        info.height = stream.value("height", 0);
        if (stream.contains("avg_frame_rate")) {
          info.fps = parse_number(stream["avg_frame_rate"]);
        }
        if (info.fps <= 0 && stream.contains("r_frame_rate")) {
          info.fps = parse_number(stream["r_frame_rate"]);
        }
      } else if (type == "audio" && !info.has_audio()) {
        if (stream.contains("sample_rate")) {
          info.sample_rate = static_cast<int>(parse_number(stream["sample_rate"]));
        }
        info.channels = stream.value("channels", 0);
      }
      if (duration <= 0 && stream.contains("duration")) {
        duration = parse_number(stream["duration"]);
      }
    }
    info.duration = TimeCode(duration);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kUnreadableMedia,
                path.string() + ": unparseable probe output: " + e.what());
  }
  if (info.duration.seconds() <= 0 || (!info.has_video() && !info.has_audio())) {
    throw Error(ErrorCode::kUnreadableMedia, path.string() + ": no usable streams");
  }
  return info;
}

std::vector<Frame> MediaIo::decode_frames(const fs::path& path,
                                          const TimeRange& range, int stride) const {
  const MediaInfo info = probe(path);
  std::vector<Frame> frames;
  for_each_frame(path, info, range, stride,
                 [&](Frame&& f) { frames.push_back(std::move(f)); });
  return frames;
}

void MediaIo::for_each_frame(const fs::path& path, const MediaInfo& info,
                             const TimeRange& range, int stride,
                             const std::function<void(Frame&&)>& sink) const {
  if (stride < 1) throw Error(ErrorCode::kPrecondition, "stride must be >= 1");
  if (!info.has_video()) {
    throw Error(ErrorCode::kUnreadableMedia, path.string() + ": no video stream");
  }
  check_range(range, info);
  const std::int64_t first = first_frame_at_or_after(range.start.seconds(), info.fps);
  const std::int64_t end = first_frame_at_or_after(range.end.seconds(), info.fps);
  if (end <= first) return;

  const Argv argv = expand_command(
      config_.frames_command,
      {{"input", path.string()},
       {"start", format_seconds(range.start.seconds())},
       {"duration", format_seconds(range.length())},
       {"width", std::to_string(info.width)},
       {"height", std::to_string(info.height)},
       {"fps", format_seconds(info.fps)}});
  Process proc = [&] {
    try {
      return Process::spawn(argv, false);
    } catch (const SpawnFailure& e) {
      rethrow_spawn(e, ErrorCode::kDecoderUnavailable, "frame decoder");
    }
  }();

  const std::size_t frame_bytes = static_cast<std::size_t>(info.width) * info.height * 3;
  std::vector<std::uint8_t> scratch(frame_bytes);
  std::int64_t delivered = 0;
  for (std::int64_t index = first; index < end; ++index) {
    const bool keep = (index - first) % stride == 0;
    std::vector<std::uint8_t> buffer = keep ? std::vector<std::uint8_t>(frame_bytes)
                                            : std::vector<std::uint8_t>();
    auto& target = keep ? buffer : scratch;
    const std::size_t got =
        proc.read_stdout(std::as_writable_bytes(std::span(target)));
    if (got < frame_bytes) break;
    if (!keep) continue;
    Frame frame;
    frame.index = index;
    frame.timestamp = TimeCode(static_cast<double>(index) / info.fps);
    frame.width = info.width;
    frame.height = info.height;
    frame.pixels = std::move(buffer);
    ++delivered;
    sink(std::move(frame));
  }
  proc.close_pipes();
  const ExitStatus status = proc.wait();
  if (delivered == 0 && !status.ok()) {
    throw Error(ErrorCode::kUnreadableMedia,
                path.string() + ": frame decoder failed: " + trim_tail(proc.stderr_text()));
  }
}

AudioBuffer MediaIo::decode_audio(const fs::path& path, const TimeRange& range) const {
  return decode_audio(path, probe(path), range);
}

AudioBuffer MediaIo::decode_audio(const fs::path& path, const MediaInfo& info,
                                  const TimeRange& range) const {
  check_range(range, info);
  AudioBuffer out;
  out.sample_rate = config_.sample_rate;
  const auto expected =
      static_cast<std::size_t>(std::llround(range.length() * config_.sample_rate));
  if (expected == 0) return out;
  if (!info.has_audio()) {
    throw Error(ErrorCode::kUnreadableMedia, path.string() + ": no audio stream");
  }
  const int channels = info.channels;
  const Argv argv =
      expand_command(config_.audio_command,
                     {{"input", path.string()},
                      {"start", format_seconds(range.start.seconds())},
                      {"duration", format_seconds(range.length())},
                      {"sample_rate", std::to_string(config_.sample_rate)},
                      {"channels", std::to_string(channels)}});
  Process proc = [&] {
    try {
      return Process::spawn(argv, false);
    } catch (const SpawnFailure& e) {
      rethrow_spawn(e, ErrorCode::kDecoderUnavailable, "audio decoder");
    }
  }();

  out.samples.reserve(expected);
  std::vector<std::uint8_t> chunk(static_cast<std::size_t>(channels) * 2 * 4096);
  std::vector<std::uint8_t> carry;
  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * 2;
  while (out.samples.size() < expected) {
    const std::size_t got = proc.read_stdout(std::as_writable_bytes(std::span(chunk)));
    carry.insert(carry.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(got));
    std::size_t pos = 0;
    for (; pos + frame_bytes <= carry.size() && out.samples.size() < expected;
         pos += frame_bytes) {
      long sum = 0;
      for (int c = 0; c < channels; ++c) {
        const std::uint8_t* p = carry.data() + pos + 2 * c;
        sum += static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
      }
      out.samples.push_back(static_cast<std::int16_t>(
          std::lround(static_cast<double>(sum) / channels)));
    }
    carry.erase(carry.begin(), carry.begin() + static_cast<std::ptrdiff_t>(pos));
    if (got < chunk.size()) break;  // EOF
  }
  proc.close_pipes();
  const ExitStatus status = proc.wait();
  if (out.samples.empty() && !status.ok()) {
    throw Error(ErrorCode::kUnreadableMedia,
                path.string() + ": audio decoder failed: " + trim_tail(proc.stderr_text()));
  }
  return out;
}

fs::path MediaIo::write_image(const Frame& frame, int max_width,
                              const fs::path& out_path) const {
  if (!frame.valid()) throw Error(ErrorCode::kPrecondition, "invalid frame");
  const image::RgbImage img =
      image::fit_width(frame.width, frame.height, frame.pixels, max_width);
  const std::string& format = config_.image_format;
  std::error_code ec;
  if (!fs::is_directory(out_path.parent_path().empty() ? fs::path(".")
                                                       : out_path.parent_path(),
                        ec)) {
    throw Error(ErrorCode::kWriteFailed,
                "directory does not exist: " + out_path.parent_path().string());
  }
  if (format == "png") {
    image::write_png(out_path, img);
  } else if (format == "ppm") {
    image::write_ppm(out_path, img);
  } else {
    if (config_.image_encoder_command.empty()) {
      throw Error(ErrorCode::kEncoderUnavailable,
                  "no image encoder configured for format '" + format + "'");
    }
    const fs::path staging = out_path.string() + ".ppm";
    image::write_ppm(staging, img);
    const Argv argv = expand_command(
        config_.image_encoder_command,
        {{"input", staging.string()}, {"output", out_path.string()}});
    CommandResult result;
    try {
      result = run_command(argv, {}, config_.probe_timeout);
    } catch (const SpawnFailure& e) {
      fs::remove(staging, ec);
      rethrow_spawn(e, ErrorCode::kEncoderUnavailable, "image encoder");
    } catch (const ProcessTimeout&) {
      fs::remove(staging, ec);
      throw Error(ErrorCode::kWriteFailed, "image encoder timed out");
    }
    fs::remove(staging, ec);
    if (!result.status.ok() || !fs::exists(out_path, ec)) {
      throw Error(ErrorCode::kWriteFailed,
                  "image encoder failed: " + trim_tail(result.err));
    }
  }
  return out_path;
}

fs::path MediaIo::render_thumbnail(const Frame& frame, const fs::path& out_path) const {
  return write_image(frame, config_.thumbnail_max_width, out_path);
}

fs::path MediaIo::write_frame_image(const Frame& frame, const fs::path& out_path) const {
  return write_image(frame, 0, out_path);
}

TimeCode MediaIo::audio_duration(const fs::path& path) const {
  if (const auto header = wav::read_header(path)) {
    return TimeCode(header->duration_seconds());
  }
  return probe(path).duration;
}

MuxResult MediaIo::mux_clip(const fs::path& source, const TimeRange& interval,
                            const fs::path& narration, const fs::path& out_path) const {
  std::error_code ec;
  if (!fs::is_regular_file(narration, ec)) {
    throw Error(ErrorCode::kPrecondition,
                "narration file missing: " + narration.string());
  }
  const MediaInfo info = probe(source);
  check_range(interval, info);
  const double narration_seconds = audio_duration(narration).seconds();
  if (narration_seconds <= 0) {
    throw Error(ErrorCode::kPrecondition, "narration is empty: " + narration.string());
  }
  const double pad = std::max(0.0, narration_seconds - interval.length());
  const Argv argv =
      expand_command(config_.mux_command,
                     {{"input", source.string()},
                      {"start", format_seconds(interval.start.seconds())},
                      {"video_duration", format_seconds(interval.length())},
                      {"narration", narration.string()},
                      {"duration", format_seconds(narration_seconds)},
                      {"pad", format_seconds(pad)},
                      {"output", out_path.string()}});
  CommandResult result;
  try {
    // Muxing re-encodes; allow far longer than a probe.
    result = run_command(argv, {}, std::chrono::hours(1));
  } catch (const SpawnFailure& e) {
    rethrow_spawn(e, ErrorCode::kMuxerUnavailable, "muxer");
  } catch (const ProcessTimeout&) {
    throw Error(ErrorCode::kWriteFailed, "muxer timed out");
  }
  if (!result.status.ok() || !fs::is_regular_file(out_path, ec)) {
    throw Error(ErrorCode::kWriteFailed,
                "muxer failed for " + out_path.string() + ": " + trim_tail(result.err));
  }
  const TimeCode clip_duration = probe(out_path).duration;
  if (std::abs(clip_duration.seconds() - narration_seconds) > kClipDurationTolerance) {
    throw Error(ErrorCode::kDurationMismatch,
                out_path.string() + " lasts " + format_seconds(clip_duration.seconds()) +
                    "s, narration " + format_seconds(narration_seconds) + "s");
  }
  return MuxResult{out_path, clip_duration};
}

}  // namespace lecsum
