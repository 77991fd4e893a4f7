#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "lecsum/assembly.hpp"
#include "lecsum/extraction.hpp"
#include "lecsum/summarization.hpp"

namespace lecsum::catalog {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kManifestFile = "manifest.json";

struct BudgetEntry {
  std::size_t transcript_words = 0;  // L_t
  std::size_t object_count = 0;      // L_o
  std::size_t ocr_words = 0;         // L_c
  long long target_words = 0;        // N
  friend bool operator==(const BudgetEntry&, const BudgetEntry&) = default;
};

// One chapter as persisted. Paths are relative to the manifest directory.
// Degraded segments (status "degraded") carry no title/summary/clip.
struct SegmentEntry {
  std::size_t index = 0;
  std::optional<std::string> title;
  TimeCode start;
  TimeCode end;
  std::optional<std::string> summary_text;
  std::optional<std::string> summary_clip;
  std::optional<double> summary_duration;
  std::string original_clip;
  std::string thumbnail;
  std::string transcript;
  std::string ocr_text;
  std::vector<std::string> objects;
  std::optional<BudgetEntry> budget;
  std::string status = "ok";
  std::optional<std::string> error;

  bool has_summary() const noexcept { return summary_clip.has_value(); }
  friend bool operator==(const SegmentEntry&, const SegmentEntry&) = default;
};

struct Manifest {
  int schema_version = kSchemaVersion;
  std::string video_id;
  std::string title;
  std::string source_path;  // relative path of the source copy
  TimeCode duration;
  std::string created_at;
  std::string config_fingerprint;
  double speech_weight = summarization::kDefaultSpeechWeight;
  double visual_weight = summarization::kDefaultVisualWeight;
  std::vector<SegmentEntry> segments;

  // Every file path the manifest references, deduplicated.
  std::vector<std::string> media_paths() const;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct ManifestHeader {
  std::string video_id;
  std::string title;
  std::string source_path;
  TimeCode duration;
  std::string created_at;
  std::string config_fingerprint;
  double speech_weight = summarization::kDefaultSpeechWeight;
  double visual_weight = summarization::kDefaultVisualWeight;
};

// Everything produced for one segment. Optional members are absent for a
// degraded segment.
struct SegmentArtifacts {
  segmentation::Segment segment;
  std::optional<extraction::SegmentEvidence> evidence;
  std::optional<summarization::SummaryResult> summary;
  std::optional<assembly::SummaryClip> clip;
  fs::path thumbnail;
  std::optional<std::string> error;
};

// Assembles and validates a manifest rooted at `dir`: segments tile the
// duration, budgets match the formula, referenced files exist.
Manifest build_manifest(const ManifestHeader& header,
                        const std::vector<SegmentArtifacts>& artifacts,
                        const fs::path& dir);

// Structural checks shared by build and load (no filesystem access).
void validate(const Manifest& manifest);

nlohmann::ordered_json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& doc);

void write_manifest(const Manifest& manifest, const fs::path& dir);
Manifest load_manifest(const fs::path& dir);

enum class SearchField { kTitle, kSummary, kTranscript, kOcr };
std::string_view to_string(SearchField field);

struct SearchHit {
  std::size_t segment_index = 0;
  SearchField field = SearchField::kTitle;
  std::string snippet;
  std::vector<std::size_t> match_offsets;  // byte offsets within snippet
  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

nlohmann::json to_json(const SearchHit& hit);

// Case-insensitive substring search; one hit per (segment, field), ordered by
// segment then title > summary > transcript > ocr. Throws Error(kEmptyQuery).
std::vector<SearchHit> search(const Manifest& manifest, std::string_view query);

}  // namespace lecsum::catalog
