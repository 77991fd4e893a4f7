#include "lecsum/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lecsum/error.hpp"

namespace lecsum::catalog {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kSnippetBefore = 40;
constexpr std::size_t kSnippetAfter = 80;

std::string relative_to(const fs::path& path, const fs::path& dir) {
  if (path.is_relative()) return path.lexically_normal().generic_string();
  return path.lexically_normal().lexically_relative(dir.lexically_normal()).generic_string();
}

bool safe_relative(const std::string& p) {
  if (p.empty()) return false;
  const fs::path path(p);
  if (path.is_absolute() || path.has_root_name()) return false;
  for (const auto& part : path) {
    if (part == ".." || part == ".") return false;
  }
  return true;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptManifest, what);
}

template <typename T>
std::optional<T> optional_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <typename J>
J optional_json(const std::optional<std::string>& v) {
  return v ? J(*v) : J(nullptr);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool continuation_byte(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

SearchHit make_hit(std::size_t segment, SearchField field, const std::string& text,
                   const std::string& needle) {
  const std::string hay = lower(text);
  const std::size_t first = hay.find(needle);
  std::size_t begin = first > kSnippetBefore ? first - kSnippetBefore : 0;
  std::size_t end = std::min(text.size(), first + needle.size() + kSnippetAfter);
  while (begin > 0 && continuation_byte(text[begin])) --begin;
  while (end < text.size() && continuation_byte(text[end])) ++end;
  SearchHit hit{segment, field, text.substr(begin, end - begin), {}};
  const std::string window = hay.substr(begin, end - begin);
  for (std::size_t pos = window.find(needle); pos != std::string::npos;
       pos = window.find(needle, pos + 1)) {
    hit.match_offsets.push_back(pos);
  }
  return hit;
}

}  // namespace

std::vector<std::string> Manifest::media_paths() const {
  std::set<std::string> paths;
  if (!source_path.empty()) paths.insert(source_path);
  for (const auto& s : segments) {
    if (!s.original_clip.empty()) paths.insert(s.original_clip);
    if (!s.thumbnail.empty()) paths.insert(s.thumbnail);
    if (s.summary_clip) paths.insert(*s.summary_clip);
  }
  return {paths.begin(), paths.end()};
}

void validate(const Manifest& m) {
  if (m.schema_version != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersionMismatch,
                "schema_version " + std::to_string(m.schema_version));
  }
  if (m.video_id.empty()) throw Error(ErrorCode::kPrecondition, "video_id is empty");
  if (m.segments.empty()) throw Error(ErrorCode::kPrecondition, "manifest has no segments");
  if (!m.source_path.empty() && !safe_relative(m.source_path)) {
    throw Error(ErrorCode::kPrecondition, "unsafe source path: " + m.source_path);
  }
  double cursor = 0.0;
  for (std::size_t i = 0; i < m.segments.size(); ++i) {
    const auto& s = m.segments[i];
    const std::string where = "segment " + std::to_string(i) + ": ";
    if (s.index != i) throw Error(ErrorCode::kPrecondition, where + "index out of order");
    if (std::abs(s.start.seconds() - cursor) > 1e-6 || s.end < s.start) {
      throw Error(ErrorCode::kPrecondition, where + "segments do not tile the duration");
    }
    cursor = s.end.seconds();
    for (const auto* p : {&s.original_clip, &s.thumbnail}) {
      if (!safe_relative(*p)) throw Error(ErrorCode::kPrecondition, where + "unsafe path '" + *p + "'");
    }
    if (s.summary_clip && !safe_relative(*s.summary_clip)) {
      throw Error(ErrorCode::kPrecondition, where + "unsafe path '" + *s.summary_clip + "'");
    }
    if (s.budget) {
      const auto expected = summarization::target_word_count(
          s.budget->transcript_words, s.budget->object_count, s.budget->ocr_words,
          m.speech_weight, m.visual_weight);
      if (expected != s.budget->target_words) {
        throw Error(ErrorCode::kPrecondition, where + "budget inconsistent with weights");
      }
    }
  }
  if (std::abs(cursor - m.duration.seconds()) > 1e-6) {
    throw Error(ErrorCode::kPrecondition, "segments do not reach the duration");
  }
}

Manifest build_manifest(const ManifestHeader& header,
                        const std::vector<SegmentArtifacts>& artifacts,
                        const fs::path& dir) {
  if (artifacts.empty()) {
    throw Error(ErrorCode::kPrecondition, "a processed video has at least one segment");
  }
  Manifest m;
  m.video_id = header.video_id;
  m.title = header.title;
  m.source_path = header.source_path;
  m.duration = header.duration;
  m.created_at = header.created_at;
  m.config_fingerprint = header.config_fingerprint;
  m.speech_weight = header.speech_weight;
  m.visual_weight = header.visual_weight;

  for (const auto& a : artifacts) {
    SegmentEntry e;
    e.index = a.segment.index;
    e.start = a.segment.start;
    e.end = a.segment.end;
    e.original_clip = header.source_path;
    e.thumbnail = relative_to(a.thumbnail, dir);
    if (a.evidence) {
      e.transcript = a.evidence->transcript.text();
      e.ocr_text = a.evidence->ocr.deduplicated_text;
      e.objects = a.evidence->objects.distinct_labels();
      const auto budget = a.summary ? a.summary->budget
                                    : summarization::compute_summary_budget(
                                          *a.evidence, header.speech_weight, header.visual_weight);
      e.budget = BudgetEntry{budget.transcript_words, budget.object_count, budget.ocr_words,
                             budget.target_words};
    }
    if (a.summary && a.clip) {
      e.title = a.summary->title;
      e.summary_text = a.summary->summary_text;
      e.summary_clip = relative_to(a.clip->clip_path, dir);
      e.summary_duration = a.clip->duration.seconds();
    } else {
      e.status = "degraded";
      e.error = a.error.value_or("summary unavailable");
    }
    m.segments.push_back(std::move(e));
  }
  std::sort(m.segments.begin(), m.segments.end(),
            [](const auto& x, const auto& y) { return x.index < y.index; });
  validate(m);

  std::error_code ec;
  for (const auto& e : m.segments) {
    if (!fs::is_regular_file(dir / e.thumbnail, ec)) {
      throw MissingArtifactError(e.index, "thumbnail", e.thumbnail);
    }
    if (!fs::is_regular_file(dir / e.original_clip, ec)) {
      throw MissingArtifactError(e.index, "original_clip", e.original_clip);
    }
    if (e.summary_clip && !fs::is_regular_file(dir / *e.summary_clip, ec)) {
      throw MissingArtifactError(e.index, "summary_clip", *e.summary_clip);
    }
  }
  return m;
}

ordered_json to_json(const Manifest& m) {
  ordered_json segments = ordered_json::array();
  for (const auto& s : m.segments) {
    ordered_json e;
    e["index"] = s.index;
    e["title"] = optional_json<ordered_json>(s.title);
    e["start"] = s.start.seconds();
    e["end"] = s.end.seconds();
    e["status"] = s.status;
    e["summary_text"] = optional_json<ordered_json>(s.summary_text);
    e["summary_clip"] = optional_json<ordered_json>(s.summary_clip);
    e["summary_duration"] =
        s.summary_duration ? ordered_json(*s.summary_duration) : ordered_json(nullptr);
    e["original_clip"] = s.original_clip;
    e["thumbnail"] = s.thumbnail;
    e["transcript"] = s.transcript;
    e["ocr_text"] = s.ocr_text;
    e["objects"] = s.objects;
    if (s.budget) {
      e["budget"] = {{"L_t", s.budget->transcript_words},
                     {"L_o", s.budget->object_count},
                     {"L_c", s.budget->ocr_words},
                     {"N", s.budget->target_words}};
    } else {
      e["budget"] = nullptr;
    }
    e["error"] = optional_json<ordered_json>(s.error);
    segments.push_back(std::move(e));
  }
  ordered_json doc;
  doc["schema_version"] = m.schema_version;
  doc["video_id"] = m.video_id;
  doc["title"] = m.title;
  doc["source_path"] = m.source_path;
  doc["duration"] = m.duration.seconds();
  doc["created_at"] = m.created_at;
  doc["config_fingerprint"] = m.config_fingerprint;
  doc["summary_weights"] = {{"w_s", m.speech_weight}, {"w_i", m.visual_weight}};
  doc["segments"] = std::move(segments);
  return doc;
}

Manifest manifest_from_json(const json& doc) {
  if (!doc.is_object()) corrupt("manifest is not a JSON object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    corrupt("missing schema_version");
  }
  const int version = doc["schema_version"].get<int>();
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersionMismatch,
                "expected " + std::to_string(kSchemaVersion) + ", found " + std::to_string(version));
  }
  Manifest m;
  try {
    m.video_id = doc.at("video_id").get<std::string>();
    m.title = doc.value("title", std::string());
    m.source_path = doc.value("source_path", std::string());
    m.duration = TimeCode(doc.at("duration").get<double>());
    m.created_at = doc.value("created_at", std::string());
    m.config_fingerprint = doc.value("config_fingerprint", std::string());
    if (const auto w = doc.find("summary_weights"); w != doc.end()) {
      m.speech_weight = w->at("w_s").get<double>();
      m.visual_weight = w->at("w_i").get<double>();
    }
    for (const auto& s : doc.at("segments")) {
      SegmentEntry e;
      e.index = s.at("index").get<std::size_t>();
      e.title = optional_field<std::string>(s, "title");
      e.start = TimeCode(s.at("start").get<double>());
      e.end = TimeCode(s.at("end").get<double>());
      e.status = s.value("status", std::string("ok"));
      e.summary_text = optional_field<std::string>(s, "summary_text");
      e.summary_clip = optional_field<std::string>(s, "summary_clip");
      e.summary_duration = optional_field<double>(s, "summary_duration");
      e.original_clip = s.at("original_clip").get<std::string>();
      e.thumbnail = s.at("thumbnail").get<std::string>();
      e.transcript = s.value("transcript", std::string());
      e.ocr_text = s.value("ocr_text", std::string());
      e.objects = s.value("objects", std::vector<std::string>{});
      if (const auto b = s.find("budget"); b != s.end() && !b->is_null()) {
        e.budget = BudgetEntry{b->at("L_t").get<std::size_t>(), b->at("L_o").get<std::size_t>(),
                               b->at("L_c").get<std::size_t>(), b->at("N").get<long long>()};
      }
      e.error = optional_field<std::string>(s, "error");
      m.segments.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    corrupt(e.what());
  } catch (const Error& e) {
    corrupt(e.what());
  }
  try {
    validate(m);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaVersionMismatch) throw;
    corrupt(e.what());
  }
  return m;
}

void write_manifest(const Manifest& manifest, const fs::path& dir) {
  validate(manifest);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kWriteFailed, "not a directory: " + dir.string());
  }
  const fs::path target = dir / kManifestFile;
  const fs::path staging = dir / (std::string(kManifestFile) + ".tmp");
  {
    std::ofstream out(staging, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kWriteFailed, "cannot open " + staging.string());
    out << to_json(manifest).dump(2) << "\n";
    out.flush();
    if (!out) throw Error(ErrorCode::kWriteFailed, "short write to " + staging.string());
  }
  fs::rename(staging, target, ec);
  if (ec) throw Error(ErrorCode::kWriteFailed, "rename failed: " + ec.message());
}

Manifest load_manifest(const fs::path& dir) {
  const fs::path file = dir / kManifestFile;
  std::ifstream in(file);
  if (!in) corrupt("cannot read " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    corrupt(file.string() + ": " + e.what());
  }
  return manifest_from_json(doc);
}

std::string_view to_string(SearchField field) {
  switch (field) {
    case SearchField::kTitle: return "title";
    case SearchField::kSummary: return "summary";
    case SearchField::kTranscript: return "transcript";
    case SearchField::kOcr: return "ocr";
  }
  return "title";
}

json to_json(const SearchHit& hit) {
  return {{"segment_index", hit.segment_index},
          {"field", to_string(hit.field)},
          {"snippet", hit.snippet},
          {"match_offsets", hit.match_offsets}};
}

std::vector<SearchHit> search(const Manifest& manifest, std::string_view query) {
  const auto b = query.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) throw Error(ErrorCode::kEmptyQuery, "query is empty");
  const auto e = query.find_last_not_of(" \t\r\n");
  const std::string needle = lower(query.substr(b, e - b + 1));

  std::vector<SearchHit> hits;
  for (const auto& s : manifest.segments) {
    const std::pair<SearchField, const std::string*> fields[] = {
        {SearchField::kTitle, s.title ? &*s.title : nullptr},
        {SearchField::kSummary, s.summary_text ? &*s.summary_text : nullptr},
        {SearchField::kTranscript, &s.transcript},
        {SearchField::kOcr, &s.ocr_text}};
    for (const auto& [field, text] : fields) {
      if (text == nullptr || lower(*text).find(needle) == std::string::npos) continue;
      hits.push_back(make_hit(s.index, field, *text, needle));
    }
  }
  return hits;
}

}  // namespace lecsum::catalog
