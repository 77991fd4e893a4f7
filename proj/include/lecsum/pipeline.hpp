#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "lecsum/catalog.hpp"
#include "lecsum/config.hpp"

namespace lecsum::pipeline {

namespace fs = std::filesystem;

struct AdapterFailure {
  std::size_t segment_index = 0;
  std::string stage;  // extraction | summarization | synthesis | assembly
  std::string code;
  std::string message;
};

struct SegmentReport {
  std::size_t index = 0;
  TimeCode start;
  TimeCode end;
  std::optional<catalog::BudgetEntry> budget;
  std::optional<double> clip_duration;
  bool ok = false;
  std::map<std::string, double> timings;  // stage -> seconds

  double original_duration() const { return end.seconds() - start.seconds(); }
};

struct PipelineReport {
  std::string video_id;
  fs::path manifest_dir;
  std::vector<SegmentReport> segments;
  double original_total = 0.0;  // all segments
  double summarized_original = 0.0;  // segments with a summary clip
  double summary_total = 0.0;
  std::vector<AdapterFailure> failures;

  std::size_t succeeded() const;
  // summary_total / summarized_original; absent when nothing succeeded.
  std::optional<double> compression_ratio() const;
  // 0 when every segment succeeded, 2 when some did, 1 when none did.
  int exit_code() const;
};

nlohmann::ordered_json to_json(const PipelineReport& report);

struct ProcessOptions {
  fs::path video;
  fs::path out_root;
  std::string video_id;  // default: sanitized file stem
  std::string title;     // default: file stem
};

// Runs segmentation, extraction, summarization, synthesis and assembly, then
// writes `<out_root>/<video_id>/` atomically. Media errors are fatal and leave
// no output directory; adapter errors degrade the affected segment only.
PipelineReport process(const ProcessOptions& options, const PipelineConfig& config);

// Derives a directory-safe id from a file name.
std::string default_video_id(const fs::path& video);

// Per-segment table and totals read back from a manifest directory.
struct InspectRow {
  std::size_t index = 0;
  TimeCode start;
  TimeCode end;
  std::optional<catalog::BudgetEntry> budget;
  std::optional<double> clip_duration;
  std::string status;
};

struct InspectReport {
  std::string video_id;
  std::vector<InspectRow> rows;
  double original_total = 0.0;
  double summarized_original = 0.0;
  double summary_total = 0.0;
  std::optional<double> compression_ratio;
};

// Throws Error(kCorruptManifest) / Error(kSchemaVersionMismatch).
InspectReport inspect(const fs::path& manifest_dir);
std::string render_table(const InspectReport& report);
nlohmann::ordered_json to_json(const InspectReport& report);

}  // namespace lecsum::pipeline
