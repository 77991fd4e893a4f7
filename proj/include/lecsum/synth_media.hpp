#pragma once

// Procedural media used by tests and offline demos. A synthetic video is a
// small JSON document describing scenes and audio regions; frames and PCM are
// rendered on demand, so the fixture stays tiny while still flowing through
// the real decoder pipe protocol via the `lecsum-synthmedia` tool.

#include <array>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

namespace lecsum::synth {

namespace fs = std::filesystem;

inline constexpr const char* kVideoFormat = "lecsum-synthetic-video";
inline constexpr const char* kClipFormat = "lecsum-synthetic-clip";

using Rgb = std::array<std::uint8_t, 3>;

struct Scene {
  double start = 0;
  double end = 0;
  // solid | gradient | slide | noise | alternate
  std::string pattern = "solid";
  Rgb color{0, 0, 0};
  Rgb color2{255, 255, 255};
  std::uint32_t seed = 0;
};

struct AudioRegion {
  double start = 0;
  double end = 0;
  std::string kind = "speech";  // speech | tone | noise
  double frequency = 220.0;
  double dbfs = -12.0;
  bool invert_right = false;  // stereo only: right = -left
};

struct VideoSpec {
  int width = 160;
  int height = 120;
  double fps = 10.0;
  double duration = 60.0;
  int sample_rate = 16000;
  int channels = 1;
  std::vector<Scene> scenes;
  std::vector<AudioRegion> audio;
  // Free-form ground truth consumed by the mock adapters:
  // {"speech":[{start,end,text}], "slides":[{start,end,lines}],
  //  "objects":[{start,end,labels:[{name,confidence}]}]}
  nlohmann::json script = nlohmann::json::object();

  std::int64_t frame_count() const;
  std::int64_t sample_count() const;
};

struct ClipSpec {
  fs::path source;
  double start = 0;
  double video_duration = 0;
  fs::path narration;
  double duration = 0;
};

nlohmann::json to_json(const VideoSpec& spec);
VideoSpec video_from_json(const nlohmann::json& doc);
void save(const VideoSpec& spec, const fs::path& path);
void save(const ClipSpec& clip, const fs::path& path);

// Renders frame `index` into `out` (width * height * 3 bytes).
void render_frame(const VideoSpec& spec, std::int64_t index,
                  std::span<std::uint8_t> out);

// Renders interleaved PCM for sample positions [first, first + count) at
// `rate` with `channels` output channels.
std::vector<std::int16_t> render_audio(const VideoSpec& spec, std::int64_t first,
                                       std::int64_t count, int rate, int channels);

// Entry point of the `lecsum-synthmedia` tool:
//   probe <path>
//   frames <path> <start> <duration>
//   audio <path> <start> <duration> <sample_rate> <channels>
//   mux <source> <start> <video_duration> <narration> <duration> <output>
int run_tool(int argc, char** argv);

}  // namespace lecsum::synth
