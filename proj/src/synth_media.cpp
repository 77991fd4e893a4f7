#include "lecsum/synth_media.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include "lecsum/media_io.hpp"
#include "lecsum/wav.hpp"

namespace lecsum::synth {
namespace {

using json = nlohmann::json;

constexpr double kEps = 1e-6;

std::uint32_t mix(std::uint32_t x) {
  x ^= x >> 16;
  x *= 0x7feb352dU;
  x ^= x >> 15;
  x *= 0x846ca68bU;
  x ^= x >> 16;
  return x;
}

std::uint32_t hash4(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  return mix(a ^ mix(b ^ mix(c ^ mix(d + 0x9e3779b9U))));
}

Rgb rgb_from(const json& v, Rgb fallback) {
  if (!v.is_array() || v.size() != 3) return fallback;
  return {v[0].get<std::uint8_t>(), v[1].get<std::uint8_t>(), v[2].get<std::uint8_t>()};
}

const Scene* scene_at(const VideoSpec& spec, double t) {
  for (const auto& s : spec.scenes) {
    if (t + kEps >= s.start && t + kEps < s.end) return &s;
  }
  return nullptr;
}

double region_sample(const AudioRegion& r, double t, std::int64_t n) {
  const double amplitude = 32767.0 * std::pow(10.0, r.dbfs / 20.0);
  const double phase = 2.0 * std::numbers::pi * r.frequency * t;
  if (r.kind == "tone") return amplitude * std::sin(phase);
  if (r.kind == "noise") {
    const auto h = hash4(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32),
                         static_cast<std::uint32_t>(r.frequency), 7);
    return amplitude * (static_cast<double>(h) / 4294967295.0 * 2.0 - 1.0);
  }
  // speech-like: a voiced tone with a syllabic envelope that never drops out
  const double envelope = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 3.0 * t);
  return amplitude * envelope * (0.7 * std::sin(phase) + 0.3 * std::sin(2.0 * phase));
}

std::int16_t clamp16(double v) {
  return static_cast<std::int16_t>(std::clamp(std::lround(v), -32768L, 32767L));
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

std::optional<json> try_read_json(const fs::path& path) {
  try {
    json doc = read_json(path);
    if (doc.is_object() && doc.contains("format")) return doc;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

double arg_number(const char* s) { return std::stod(s); }

void write_stdout(const void* data, std::size_t bytes) {
  if (std::fwrite(data, 1, bytes, stdout) != bytes) {
    throw std::runtime_error("stdout closed");
  }
}

ClipSpec clip_from_json(const json& doc) {
  ClipSpec c;
  c.source = doc.at("source").get<std::string>();
  c.start = doc.at("start").get<double>();
  c.video_duration = doc.at("video_duration").get<double>();
  c.narration = doc.at("narration").get<std::string>();
  c.duration = doc.at("duration").get<double>();
  return c;
}

json probe_document(double duration, const VideoSpec* video, int sample_rate,
                    int channels) {
  json streams = json::array();
  if (video != nullptr) {
    const auto fps_num = static_cast<long long>(std::llround(video->fps * 1000));
    streams.push_back({{"index", 0},
                       {"codec_type", "video"},
                       {"codec_name", "rawvideo"},
                       {"width", video->width},
                       {"height", video->height},
                       {"r_frame_rate", std::to_string(fps_num) + "/1000"},
                       {"avg_frame_rate", std::to_string(fps_num) + "/1000"}});
  }
  if (sample_rate > 0) {
    streams.push_back({{"index", static_cast<int>(streams.size())},
                       {"codec_type", "audio"},
                       {"codec_name", "pcm_s16le"},
                       {"sample_rate", std::to_string(sample_rate)},
                       {"channels", channels}});
  }
  return {{"streams", streams},
          {"format", {{"duration", format_seconds(duration)}}}};
}

int cmd_probe(const fs::path& path) {
  if (auto doc = try_read_json(path)) {
    const auto format = (*doc)["format"].get<std::string>();
    if (format == kVideoFormat) {
      const VideoSpec v = video_from_json(*doc);
      std::cout << probe_document(v.duration, &v, v.sample_rate, v.channels).dump(2)
                << "\n";
      return 0;
    }
    if (format == kClipFormat) {
      const ClipSpec c = clip_from_json(*doc);
      const VideoSpec v = video_from_json(read_json(c.source));
      const auto header = wav::read_header(c.narration);
      std::cout << probe_document(c.duration, &v, header ? header->sample_rate : 0,
                                  header ? header->channels : 0)
                       .dump(2)
                << "\n";
      return 0;
    }
  }
  if (const auto header = wav::read_header(path)) {
    std::cout << probe_document(header->duration_seconds(), nullptr,
                                header->sample_rate, header->channels)
                     .dump(2)
              << "\n";
    return 0;
  }
  std::cerr << path.string() << ": unrecognized media\n";
  return 1;
}

int cmd_frames(const fs::path& path, double start, double duration) {
  const auto doc = try_read_json(path);
  if (!doc) {
    std::cerr << path.string() << ": unrecognized media\n";
    return 1;
  }
  const auto format = (*doc)["format"].get<std::string>();
  std::optional<ClipSpec> clip;
  VideoSpec video;
  double total = 0;
  if (format == kClipFormat) {
    clip = clip_from_json(*doc);
    video = video_from_json(read_json(clip->source));
    total = clip->duration;
  } else {
    video = video_from_json(*doc);
    total = video.duration;
  }
  const std::int64_t limit = first_frame_at_or_after(total, video.fps);
  const std::int64_t first = first_frame_at_or_after(start, video.fps);
  const std::int64_t end =
      std::min(limit, first_frame_at_or_after(start + duration, video.fps));
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(video.width) * video.height * 3);
  for (std::int64_t i = first; i < end; ++i) {
    std::int64_t source_index = i;
    if (clip) {
      const std::int64_t src_first = first_frame_at_or_after(clip->start, video.fps);
      const std::int64_t src_last =
          std::max(src_first,
                   first_frame_at_or_after(clip->start + clip->video_duration, video.fps) - 1);
      source_index = std::min(src_first + i, src_last);  // frozen tail
    }
    render_frame(video, source_index, buf);
    write_stdout(buf.data(), buf.size());
  }
  std::fflush(stdout);
  return 0;
}

void emit_pcm(const std::vector<std::int16_t>& pcm) {
  std::vector<std::uint8_t> bytes(pcm.size() * 2);
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(pcm[i]);
    bytes[2 * i] = static_cast<std::uint8_t>(v & 0xff);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(v >> 8);
  }
  write_stdout(bytes.data(), bytes.size());
}

std::vector<std::int16_t> wav_window(const wav::PcmData& pcm, double start,
                                     double duration, int rate, int channels) {
  const auto count = static_cast<std::int64_t>(std::llround(duration * rate));
  const auto first = static_cast<std::int64_t>(std::llround(start * rate));
  std::vector<std::int16_t> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, count)) * channels);
  const auto frames = static_cast<std::int64_t>(pcm.frame_count());
  for (std::int64_t n = first; n < first + count; ++n) {
    // nearest-sample resampling
    const auto src = static_cast<std::int64_t>(
        std::floor(static_cast<double>(n) * pcm.sample_rate / rate + 1e-9));
    if (src >= frames) break;
    long sum = 0;
    for (int c = 0; c < pcm.channels; ++c) {
      sum += pcm.samples[static_cast<std::size_t>(src * pcm.channels + c)];
    }
    for (int c = 0; c < channels; ++c) {
      if (channels == pcm.channels) {
        out.push_back(pcm.samples[static_cast<std::size_t>(src * pcm.channels + c)]);
      } else {
        out.push_back(clamp16(static_cast<double>(sum) / pcm.channels));
      }
    }
  }
  return out;
}

int cmd_audio(const fs::path& path, double start, double duration, int rate,
              int channels) {
  if (auto doc = try_read_json(path)) {
    const auto format = (*doc)["format"].get<std::string>();
    if (format == kVideoFormat) {
      const VideoSpec v = video_from_json(*doc);
      const auto total = static_cast<std::int64_t>(std::llround(v.duration * rate));
      const auto first = static_cast<std::int64_t>(std::llround(start * rate));
      auto count = static_cast<std::int64_t>(std::llround(duration * rate));
      count = std::max<std::int64_t>(0, std::min(count, total - first));
      constexpr std::int64_t kChunk = 1 << 16;
      for (std::int64_t at = first; at < first + count; at += kChunk) {
        emit_pcm(render_audio(v, at, std::min(kChunk, first + count - at), rate, channels));
      }
      std::fflush(stdout);
      return 0;
    }
    if (format == kClipFormat) {
      const ClipSpec c = clip_from_json(*doc);
      const auto pcm = wav::read(c.narration);
      if (!pcm) {
        std::cerr << c.narration.string() << ": unreadable narration\n";
        return 1;
      }
      emit_pcm(wav_window(*pcm, start, duration, rate, channels));
      std::fflush(stdout);
      return 0;
    }
  }
  if (const auto pcm = wav::read(path)) {
    emit_pcm(wav_window(*pcm, start, duration, rate, channels));
    std::fflush(stdout);
    return 0;
  }
  std::cerr << path.string() << ": unrecognized media\n";
  return 1;
}

int cmd_mux(const fs::path& source, double start, double video_duration,
            const fs::path& narration, double duration, const fs::path& output) {
  const auto doc = try_read_json(source);
  if (!doc || (*doc)["format"] != kVideoFormat) {
    std::cerr << source.string() << ": not a synthetic video\n";
    return 1;
  }
  if (!wav::read_header(narration)) {
    std::cerr << narration.string() << ": not a WAV file\n";
    return 1;
  }
  ClipSpec clip;
  clip.source = fs::absolute(source);
  clip.start = start;
  clip.video_duration = video_duration;
  clip.narration = fs::absolute(narration);
  clip.duration = duration;
  save(clip, output);
  return 0;
}

}  // namespace

std::int64_t VideoSpec::frame_count() const {
  return first_frame_at_or_after(duration, fps);
}

std::int64_t VideoSpec::sample_count() const {
  return static_cast<std::int64_t>(std::llround(duration * sample_rate));
}

json to_json(const VideoSpec& spec) {
  json scenes = json::array();
  for (const auto& s : spec.scenes) {
    scenes.push_back({{"start", s.start},
                      {"end", s.end},
                      {"pattern", s.pattern},
                      {"color", s.color},
                      {"color2", s.color2},
                      {"seed", s.seed}});
  }
  json audio = json::array();
  for (const auto& a : spec.audio) {
    audio.push_back({{"start", a.start},
                     {"end", a.end},
                     {"kind", a.kind},
                     {"frequency", a.frequency},
                     {"dbfs", a.dbfs},
                     {"invert_right", a.invert_right}});
  }
  return {{"format", kVideoFormat},
          {"width", spec.width},
          {"height", spec.height},
          {"fps", spec.fps},
          {"duration", spec.duration},
          {"sample_rate", spec.sample_rate},
          {"channels", spec.channels},
          {"scenes", scenes},
          {"audio", audio},
          {"script", spec.script}};
}

VideoSpec video_from_json(const json& doc) {
  if (doc.value("format", std::string()) != kVideoFormat) {
    throw std::runtime_error("not a synthetic video document");
  }
  VideoSpec v;
  v.width = doc.value("width", v.width);
  v.height = doc.value("height", v.height);
  v.fps = doc.value("fps", v.fps);
  v.duration = doc.value("duration", v.duration);
  v.sample_rate = doc.value("sample_rate", v.sample_rate);
  v.channels = doc.value("channels", v.channels);
  for (const auto& s : doc.value("scenes", json::array())) {
    Scene scene;
    scene.start = s.value("start", 0.0);
    scene.end = s.value("end", 0.0);
    scene.pattern = s.value("pattern", scene.pattern);
    scene.color = rgb_from(s.value("color", json()), scene.color);
    scene.color2 = rgb_from(s.value("color2", json()), scene.color2);
    scene.seed = s.value("seed", 0u);
    v.scenes.push_back(scene);
  }
  for (const auto& a : doc.value("audio", json::array())) {
    AudioRegion r;
    r.start = a.value("start", 0.0);
    r.end = a.value("end", 0.0);
    r.kind = a.value("kind", r.kind);
    r.frequency = a.value("frequency", r.frequency);
    r.dbfs = a.value("dbfs", r.dbfs);
    r.invert_right = a.value("invert_right", false);
    v.audio.push_back(r);
  }
  v.script = doc.value("script", json::object());
  return v;
}

void save(const VideoSpec& spec, const fs::path& path) {
  std::ofstream out(path);
  out << to_json(spec).dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void save(const ClipSpec& clip, const fs::path& path) {
  const json doc = {{"format", kClipFormat},
                    {"source", clip.source.string()},
                    {"start", clip.start},
                    {"video_duration", clip.video_duration},
                    {"narration", clip.narration.string()},
                    {"duration", clip.duration}};
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void render_frame(const VideoSpec& spec, std::int64_t index, std::span<std::uint8_t> out) {
  const double t = static_cast<double>(index) / spec.fps;
  const Scene* scene = scene_at(spec, t);
  const int w = spec.width;
  const int h = spec.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb px{0, 0, 0};
      if (scene != nullptr) {
        const auto& p = scene->pattern;
        if (p == "solid") {
          px = scene->color;
        } else if (p == "alternate") {
          px = (index % 2 == 0) ? scene->color : scene->color2;
        } else if (p == "gradient") {
          const double a = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
          for (int c = 0; c < 3; ++c) {
            px[c] = static_cast<std::uint8_t>(
                std::lround(scene->color[c] * (1 - a) + scene->color2[c] * a));
          }
        } else if (p == "slide") {
          // text-like bars on a flat background, fixed per seed
          const int line = y / 8;
          const bool in_bar = (y % 8) < 4 && line > 0 && y < h - 8;
          const int bar_len = static_cast<int>(
              w / 4 + hash4(scene->seed, static_cast<std::uint32_t>(line), 1, 2) % (w / 2 + 1));
          px = (in_bar && x >= 8 && x < 8 + bar_len) ? scene->color2 : scene->color;
        } else if (p == "noise") {
          const auto v = hash4(scene->seed, static_cast<std::uint32_t>(index),
                               static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
          px = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                static_cast<std::uint8_t>(v >> 16)};
        }
      }
      const std::size_t o = (static_cast<std::size_t>(y) * w + x) * 3;
      out[o] = px[0];
      out[o + 1] = px[1];
      out[o + 2] = px[2];
    }
  }
}

std::vector<std::int16_t> render_audio(const VideoSpec& spec, std::int64_t first,
                                       std::int64_t count, int rate, int channels) {
  std::vector<std::int16_t> out;
  out.reserve(static_cast<std::size_t>(count) * channels);
  for (std::int64_t n = first; n < first + count; ++n) {
    const double t = static_cast<double>(n) / rate;
    double left = 0.0;
    double right = 0.0;
    for (const auto& r : spec.audio) {
      if (t + kEps >= r.start && t + kEps < r.end) {
        const double s = region_sample(r, t, n);
        left += s;
        right += (r.invert_right && spec.channels >= 2) ? -s : s;
      }
    }
    if (channels == 1) {
      // The "source" is mono unless it declares stereo; requesting one channel
      // from a stereo source averages like any decoder downmix would.
      out.push_back(clamp16(spec.channels >= 2 ? (left + right) / 2.0 : left));
    } else {
      out.push_back(clamp16(left));
      out.push_back(clamp16(right));
      for (int c = 2; c < channels; ++c) out.push_back(clamp16(left));
    }
  }
  return out;
}

int run_tool(int argc, char** argv) {
  const std::string usage =
      "usage: lecsum-synthmedia probe <path>\n"
      "       lecsum-synthmedia frames <path> <start> <duration>\n"
      "       lecsum-synthmedia audio <path> <start> <duration> <rate> <channels>\n"
      "       lecsum-synthmedia mux <source> <start> <video_duration> <narration> "
      "<duration> <output>\n";
  if (argc < 3) {
    std::cerr << usage;
    return 2;
  }
  const std::string cmd = argv[1];
  try {
    if (cmd == "probe" && argc == 3) return cmd_probe(argv[2]);
    if (cmd == "frames" && argc == 5) {
      return cmd_frames(argv[2], arg_number(argv[3]), arg_number(argv[4]));
    }
    if (cmd == "audio" && argc == 7) {
      return cmd_audio(argv[2], arg_number(argv[3]), arg_number(argv[4]),
                       std::stoi(argv[5]), std::stoi(argv[6]));
    }
    if (cmd == "mux" && argc == 8) {
      return cmd_mux(argv[2], arg_number(argv[3]), arg_number(argv[4]), argv[5],
                     arg_number(argv[6]), argv[7]);
    }
  } catch (const std::exception& e) {
    std::cerr << "lecsum-synthmedia: " << e.what() << "\n";
    return 1;
  }
  std::cerr << usage;
  return 2;
}

}  // namespace lecsum::synth
