#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lecsum/adapter.hpp"
#include "lecsum/assembly.hpp"
#include "lecsum/extraction.hpp"
#include "lecsum/media_io.hpp"
#include "lecsum/segmentation.hpp"
#include "lecsum/summarization.hpp"

namespace lecsum {

// One adapter kind: an external command, or the built-in mock when no command
// is given. "{input}" in either the command or the mock fixture stands for the
// video being processed.
struct AdapterConfig {
  std::string command;
  MockOptions mock;
  bool uses_mock() const noexcept { return command.empty(); }
};

struct PipelineConfig {
  segmentation::CutParams cut;
  segmentation::SilenceParams silence;
  double min_segment = 15.0;
  segmentation::FusionMode fusion = segmentation::FusionMode::kUnion;

  extraction::KeyframePolicy keyframes;
  double confidence_floor = 0.5;
  extraction::ObjectCountMode object_count = extraction::ObjectCountMode::kDistinct;

  double speech_weight = summarization::kDefaultSpeechWeight;
  double visual_weight = summarization::kDefaultVisualWeight;

  assembly::CutMode cut_mode = assembly::CutMode::kMiddle;
  std::string clip_extension = "mp4";
  double reference_max_seconds = assembly::kMaxReferenceSeconds;

  MediaToolsConfig media;

  std::chrono::milliseconds adapter_timeout{120'000};
  int parallelism = 4;        // segments processed concurrently
  int mux_parallelism = 2;    // concurrent mux jobs
  AdapterConfig asr, ocr, objdet, llm, tts;

  std::filesystem::path output_dir = "out";

  PipelineConfig();

  const AdapterConfig& adapter(AdapterKind kind) const;
  AdapterConfig& adapter(AdapterKind kind);

  // Throws Error(kInvalidConfig) when an invariant is broken: weights >= 0,
  // parallelism >= 1, every adapter command runnable.
  void validate() const;

  // Stable hash of every setting that influences the output.
  std::string fingerprint() const;

  // Builds the adapter set, substituting `input` for "{input}".
  AdapterSet make_adapters(const std::filesystem::path& input) const;
};

// Reads a TOML document. Missing keys keep their defaults; unknown keys and
// ill-typed values are rejected. Relative paths resolve against the file's
// directory. Throws Error(kInvalidConfig).
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view toml_text,
                            const std::filesystem::path& base_dir);

}  // namespace lecsum
