#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "lecsum/adapter.hpp"
#include "lecsum/error.hpp"
#include "lecsum/segmentation.hpp"
#include "lecsum/wav.hpp"

namespace lecsum {
namespace {

using json = nlohmann::json;

constexpr const char* kFiller[] = {
    "lecture", "topic",  "example", "method", "result", "concept", "model",
    "data",    "system", "theory",  "figure", "slide",  "process", "value"};

json load_script(const MockOptions& options) {
  if (options.fixture.empty()) return json();
  std::ifstream in(options.fixture);
  if (!in) throw Error(ErrorCode::kAdapterFailure, "mock fixture missing: " + options.fixture.string());
  try {
    return json::parse(in).value("script", json::object());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kAdapterFailure, std::string("mock fixture unreadable: ") + e.what());
  }
}

json context_of(const json& request) { return request.value("context", json::object()); }

std::size_t segment_of(const json& request) {
  return context_of(request).value("segment_index", std::size_t{0});
}

bool covers(const json& item, double t) {
  return t >= item.value("start", 0.0) && t < item.value("end", 0.0);
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string effective_mode(const MockOptions& options, const json& request) {
  const auto seg = segment_of(request);
  if (std::find(options.fail_segments.begin(), options.fail_segments.end(), seg) !=
      options.fail_segments.end()) {
    return "fail";
  }
  return options.mode;
}

std::vector<std::string> image_paths(const json& request) {
  std::vector<std::string> paths;
  for (const auto& p : request.value("image_paths", json::array())) {
    const auto path = p.get<std::string>();
    if (!fs::exists(path)) throw Error(ErrorCode::kAdapterFailure, "image missing: " + path);
    paths.push_back(path);
  }
  return paths;
}

double timestamp_of(const json& request, std::size_t i) {
  const auto ts = context_of(request).value("timestamps", json::array());
  return i < ts.size() ? ts[i].get<double>() : context_of(request).value("start", 0.0);
}

json respond_asr(const MockOptions& options, const json& request) {
  const auto audio_path = request.value("audio_path", std::string());
  if (!fs::exists(audio_path)) throw Error(ErrorCode::kAdapterFailure, "audio missing: " + audio_path);
  const json ctx = context_of(request);
  const double start = ctx.value("start", 0.0);
  const double end = ctx.value("end", start);
  json segments = json::array();
  const json script = load_script(options);
  if (script.is_object() && script.contains("speech")) {
    for (const auto& piece : script["speech"]) {
      const double mid = (piece.value("start", 0.0) + piece.value("end", 0.0)) / 2.0;
      if (mid < start || mid >= end) continue;
      segments.push_back({{"text", piece.value("text", std::string())},
                          {"start", std::max(0.0, piece.value("start", 0.0) - start)},
                          {"end", std::min(end, piece.value("end", 0.0)) - start}});
    }
    return {{"segments", segments}};
  }
  // Without a script: filler words at 2 words/s, but only if the audio is
  // audible at all.
  const auto pcm = wav::read(audio_path);
  if (!pcm || pcm->samples.empty() || segmentation::rms_dbfs(pcm->samples) < -40.0) {
    return {{"segments", segments}};
  }
  const auto words = static_cast<std::size_t>(pcm->duration_seconds() * 2.0);
  std::string text;
  std::uint32_t state = static_cast<std::uint32_t>(segment_of(request)) * 2654435761U + 1;
  for (std::size_t i = 0; i < words; ++i) {
    state = state * 1664525U + 1013904223U;
    if (!text.empty()) text += ' ';
    text += kFiller[(state >> 16) % std::size(kFiller)];
  }
  segments.push_back({{"text", text}, {"start", 0.0}, {"end", pcm->duration_seconds()}});
  return {{"segments", segments}};
}

json respond_ocr(const MockOptions& options, const json& request) {
  const auto paths = image_paths(request);
  const json script = load_script(options);
  json frames = json::array();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    json lines = json::array();
    if (script.is_object() && script.contains("slides")) {
      const double t = timestamp_of(request, i);
      for (const auto& slide : script["slides"]) {
        if (!covers(slide, t)) continue;
        for (const auto& line : slide.value("lines", json::array())) lines.push_back(line);
      }
    }
    frames.push_back({{"lines", lines}});
  }
  return {{"frames", frames}};
}

json respond_objdet(const MockOptions& options, const json& request) {
  const auto paths = image_paths(request);
  const json script = load_script(options);
  json frames = json::array();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    json labels = json::array();
    if (script.is_object() && script.contains("objects")) {
      const double t = timestamp_of(request, i);
      for (const auto& region : script["objects"]) {
        if (!covers(region, t)) continue;
        for (const auto& label : region.value("labels", json::array())) labels.push_back(label);
      }
    }
    frames.push_back({{"labels", labels}});
  }
  return {{"frames", frames}};
}

// Words of the evidence sections of a prompt, skipping labels and "(none)".
std::vector<std::string> evidence_words(const std::string& prompt) {
  std::vector<std::string> words;
  std::istringstream in(prompt);
  std::string line;
  bool in_evidence = false;
  while (std::getline(in, line)) {
    if (line == "TRANSCRIPTION:" || line == "OCR_TEXT:" || line == "OBJECTS:") {
      in_evidence = true;
      continue;
    }
    if (line.rfind("Limit the summary", 0) == 0) break;
    if (!in_evidence || line == "(none)") continue;
    for (auto& w : split_words(line)) words.push_back(std::move(w));
  }
  return words;
}

json respond_llm(const MockOptions& options, const json& request, const std::string& mode) {
  const std::string prompt = request.value("prompt", std::string());
  const auto max_words = request.value("max_words", std::size_t{50});
  const auto seg = segment_of(request);
  if (mode == "empty") return {{"title", "Segment " + std::to_string(seg + 1)}, {"summary", ""}};
  if (mode == "malformed") return {{"text", "unexpected shape"}};

  const auto words = evidence_words(prompt);
  std::string title = "Segment " + std::to_string(seg + 1);
  if (!words.empty()) {
    title += ":";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, words.size()); ++i) title += " " + words[i];
  }
  if (mode == "title_only") return {{"title", title}};

  std::string summary;
  for (std::size_t i = 0; i < max_words; ++i) {
    if (i > 0) summary += ' ';
    summary += words.empty() ? std::string("summary") : words[i % words.size()];
  }
  (void)options;
  return {{"title", title}, {"summary", summary}};
}

json respond_tts(const MockOptions& options, const json& request, const std::string& mode) {
  const auto text = request.value("text", std::string());
  const auto reference = request.value("reference_audio_path", std::string());
  const auto out_path = request.value("out_path", std::string());
  if (text.empty()) throw Error(ErrorCode::kAdapterFailure, "empty text");
  if (!reference.empty() && !fs::exists(reference)) {
    throw Error(ErrorCode::kAdapterFailure, "reference audio missing: " + reference);
  }
  if (out_path.empty()) throw Error(ErrorCode::kAdapterFailure, "no out_path");
  const double duration = static_cast<double>(split_words(text).size()) / options.words_per_second;
  if (mode != "no_file") {
    const int rate = options.sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(duration * rate));
    std::vector<std::int16_t> pcm(n);
    const double amplitude = 32767.0 * std::pow(10.0, -20.0 / 20.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      const double env = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 4.0 * t);
      pcm[i] = static_cast<std::int16_t>(
          std::lround(amplitude * env * std::sin(2.0 * std::numbers::pi * 180.0 * t)));
    }
    wav::write(out_path, rate, 1, pcm);
  }
  return {{"audio_path", out_path}, {"duration_seconds", duration}};
}

}  // namespace

json mock_respond(AdapterKind kind, const MockOptions& options, const json& request) {
  const std::string mode = effective_mode(options, request);
  if (mode == "fail") {
    throw Error(ErrorCode::kAdapterFailure,
                std::string(to_string(kind)) + " mock forced failure on segment " +
                    std::to_string(segment_of(request)));
  }
  if (mode == "slow") std::this_thread::sleep_for(std::chrono::seconds(30));
  switch (kind) {
    case AdapterKind::kAsr: return respond_asr(options, request);
    case AdapterKind::kOcr: return respond_ocr(options, request);
    case AdapterKind::kObjDet: return respond_objdet(options, request);
    case AdapterKind::kLlm: return respond_llm(options, request, mode);
    case AdapterKind::kTts: return respond_tts(options, request, mode);
  }
  throw Error(ErrorCode::kAdapterFailure, "unknown adapter kind");
}

}  // namespace lecsum
