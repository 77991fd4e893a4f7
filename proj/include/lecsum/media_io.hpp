#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lecsum/timecode.hpp"

namespace lecsum {

namespace fs = std::filesystem;

// One decoded video frame, packed RGB24.
struct Frame {
  std::int64_t index = 0;
  TimeCode timestamp;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  bool valid() const noexcept {
    return width > 0 && height > 0 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }
};

// Mono signed 16-bit PCM.
struct AudioBuffer {
  int sample_rate = 16000;
  std::vector<std::int16_t> samples;

  TimeCode duration() const {
    return TimeCode(sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                                    : 0.0);
  }
  // Samples covering [range.start, range.end), clamped to the buffer.
  AudioBuffer slice(const TimeRange& range) const;
};

struct MediaInfo {
  TimeCode duration;
  double fps = 0.0;  // 0 when the file has no video stream
  int width = 0;
  int height = 0;
  int sample_rate = 0;  // 0 when the file has no audio stream
  int channels = 0;

  bool has_video() const noexcept { return fps > 0 && width > 0 && height > 0; }
  bool has_audio() const noexcept { return sample_rate > 0 && channels > 0; }
};

// Command templates for the external decoder/encoder/muxer. Placeholders:
//   probe:   {input}
//   frames:  {input} {start} {duration} {width} {height} {fps}
//   audio:   {input} {start} {duration} {sample_rate} {channels}
//   mux:     {input} {start} {video_duration} {narration} {duration} {pad}
//            {output}
//   image_encoder: {input} (a PPM file) {output}
// The frames command must write raw RGB24 frames to stdout, the audio command
// little-endian s16 PCM interleaved with {channels} channels at {sample_rate}.
// The probe command must print an ffprobe-style JSON document
// (-print_format json -show_format -show_streams).
struct MediaToolsConfig {
  std::string probe_command =
      "ffprobe -v error -print_format json -show_format -show_streams {input}";
  std::string frames_command =
      "ffmpeg -nostdin -v error -ss {start} -i {input} -t {duration} -an "
      "-f rawvideo -pix_fmt rgb24 -";
  std::string audio_command =
      "ffmpeg -nostdin -v error -ss {start} -i {input} -t {duration} -vn "
      "-f s16le -acodec pcm_s16le -ar {sample_rate} -ac {channels} -";
  std::string mux_command =
      "ffmpeg -nostdin -y -v error -ss {start} -t {video_duration} -i {input} "
      "-i {narration} -filter_complex "
      "[0:v]tpad=stop_mode=clone:stop_duration={pad}[v] -map [v] -map 1:a "
      "-c:v libx264 -pix_fmt yuv420p -c:a aac -t {duration} {output}";
  std::string image_encoder_command;  // empty: png/ppm only
  int sample_rate = 16000;
  std::string image_format = "png";
  int thumbnail_max_width = 320;
  std::chrono::milliseconds probe_timeout{60'000};
};

struct MuxResult {
  fs::path path;
  TimeCode duration;
};

// Tolerance on summary clip duration vs narration duration.
inline constexpr double kClipDurationTolerance = 0.050;

class MediaIo {
 public:
  explicit MediaIo(MediaToolsConfig config);

  const MediaToolsConfig& config() const noexcept { return config_; }

  MediaInfo probe(const fs::path& path) const;

  // Every `stride`-th frame whose timestamp lies in [range.start, range.end).
  std::vector<Frame> decode_frames(const fs::path& path, const TimeRange& range,
                                   int stride) const;

  // Streaming form: at most one frame alive at a time.
  void for_each_frame(const fs::path& path, const MediaInfo& info,
                      const TimeRange& range, int stride,
                      const std::function<void(Frame&&)>& sink) const;

  AudioBuffer decode_audio(const fs::path& path, const TimeRange& range) const;
  AudioBuffer decode_audio(const fs::path& path, const MediaInfo& info,
                           const TimeRange& range) const;

  // Writes `frame` scaled to the configured max width in the configured
  // format. Returns the written path.
  fs::path render_thumbnail(const Frame& frame, const fs::path& out_path) const;

  // Writes `frame` unscaled in the configured format.
  fs::path write_frame_image(const Frame& frame, const fs::path& out_path) const;

  // Duration of an audio file: native for WAV, else via probe.
  TimeCode audio_duration(const fs::path& path) const;

  // Muxes `narration` over the source's `interval`; the last frame is held
  // when the narration outlasts the interval. The result is re-probed and
  // must match the narration duration within kClipDurationTolerance.
  MuxResult mux_clip(const fs::path& source, const TimeRange& interval,
                     const fs::path& narration, const fs::path& out_path) const;

 private:
  fs::path write_image(const Frame& frame, int max_width,
                       const fs::path& out_path) const;

  MediaToolsConfig config_;
};

// Frame ordinal of the first frame at or after `t` for a stream at `fps`.
std::int64_t first_frame_at_or_after(double t, double fps);

// Decimal rendering used for time placeholders.
std::string format_seconds(double seconds);

}  // namespace lecsum
