#include "lecsum/pipeline.hpp"

#include <spdlog/spdlog.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "lecsum/error.hpp"
#include "lecsum/server.hpp"

namespace lecsum::pipeline {
namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}
  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }
  void release() {
    {
      std::lock_guard lock(mutex_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int count_;
};

// Errors that cost one segment its summary instead of aborting the run.
bool degradable(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAdapterFailure:
    case ErrorCode::kAdapterTimeout:
    case ErrorCode::kEmptySummary:
    case ErrorCode::kNoSpeechFound:
    case ErrorCode::kInconsistentSegment:
    case ErrorCode::kDurationMismatch:
    case ErrorCode::kPrecondition:
      return true;
    default:
      return false;
  }
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string numbered(const char* stem, std::size_t index, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, index, ext.c_str());
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void link_or_copy(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::create_hard_link(from, to, ec);
  if (!ec) return;
  fs::copy_file(from, to, ec);
  if (ec) throw Error(ErrorCode::kWriteFailed, "cannot copy source: " + ec.message());
}

std::vector<segmentation::Segment> segment_video(const MediaIo& media, const fs::path& video,
                                                 const MediaInfo& info, const AudioBuffer& audio,
                                                 const PipelineConfig& config) {
  segmentation::SceneCutDetector detector(config.cut);
  media.for_each_frame(video, info, {TimeCode(0), info.duration},
                       segmentation::cut_detection_stride(info.fps),
                       [&](Frame&& frame) { detector.push(frame); });
  if (detector.frames_seen() < 2) {
    throw Error(ErrorCode::kTooFewFrames, "video yields fewer than two frames");
  }
  const auto silences = segmentation::detect_silences(audio, config.silence);
  auto segments = segmentation::fuse_boundaries(detector.cuts(), silences, info.duration,
                                                config.min_segment, config.fusion);
  spdlog::info("segmentation: {} cuts, {} silences, {} segments", detector.cuts().size(),
               silences.size(), segments.size());
  return segments;
}

struct SegmentWork {
  catalog::SegmentArtifacts artifacts;
  SegmentReport report;
  std::optional<AdapterFailure> failure;
};

struct RunContext {
  const PipelineConfig& config;
  const MediaIo& media;
  const AdapterSet& adapters;
  const fs::path& video;
  const MediaInfo& info;
  const AudioBuffer& audio;
  const fs::path& staging;
  Semaphore& mux_slots;
};

SegmentWork process_segment(const RunContext& ctx, const segmentation::Segment& segment) {
  SegmentWork work;
  work.artifacts.segment = segment;
  work.report.index = segment.index;
  work.report.start = segment.start;
  work.report.end = segment.end;

  const fs::path work_dir = ctx.staging / "work" / numbered("segment", segment.index, "d");
  fs::create_directories(work_dir);

  auto t0 = Clock::now();
  const auto keyframes = extraction::sample_keyframes(ctx.media, ctx.video, ctx.info, segment,
                                                      ctx.config.keyframes, work_dir);
  if (keyframes.frames.empty()) {
    throw Error(ErrorCode::kUnreadableMedia,
                "no frames decoded for segment " + std::to_string(segment.index));
  }
  const double mid = (segment.start.seconds() + segment.end.seconds()) / 2.0;
  const auto thumb_frame = std::min_element(
      keyframes.frames.begin(), keyframes.frames.end(), [mid](const Frame& a, const Frame& b) {
        return std::abs(a.timestamp.seconds() - mid) < std::abs(b.timestamp.seconds() - mid);
      });
  work.artifacts.thumbnail = ctx.media.render_thumbnail(
      *thumb_frame,
      ctx.staging / "thumbs" / numbered("segment", segment.index, ctx.media.config().image_format));
  const AudioBuffer segment_audio = ctx.audio.slice(segment.range());

  std::string stage = "extraction";
  try {
    auto transcript = extraction::transcribe(*ctx.adapters.asr, segment_audio, segment, work_dir);
    auto ocr = extraction::ocr_segment(*ctx.adapters.ocr, keyframes, segment);
    auto objects = extraction::detect_objects(*ctx.adapters.objdet, keyframes, segment,
                                              ctx.config.confidence_floor, ctx.config.object_count);
    work.artifacts.evidence = extraction::aggregate_evidence(segment, std::move(transcript),
                                                             std::move(ocr), std::move(objects));
    const auto& evidence = *work.artifacts.evidence;
    const auto budget = summarization::compute_summary_budget(evidence, ctx.config.speech_weight,
                                                              ctx.config.visual_weight);
    work.report.budget = catalog::BudgetEntry{budget.transcript_words, budget.object_count,
                                              budget.ocr_words, budget.target_words};
    work.report.timings["extraction"] = seconds_since(t0);

    stage = "summarization";
    t0 = Clock::now();
    auto summary = summarization::summarize_segment(
        *ctx.adapters.llm, summarization::build_prompt(evidence, budget), budget, segment);
    work.report.timings["summarization"] = seconds_since(t0);

    stage = "synthesis";
    t0 = Clock::now();
    const fs::path reference = assembly::extract_reference_audio(
        segment_audio, evidence.transcript, ctx.config.silence,
        work_dir / numbered("reference", segment.index, "wav"), ctx.config.reference_max_seconds);
    const auto narration = assembly::synthesize_narration(
        *ctx.adapters.tts, ctx.media, summary.summary_text, reference,
        ctx.staging / "clips" / numbered("narration", segment.index, "wav"), segment);
    work.report.timings["synthesis"] = seconds_since(t0);

    stage = "assembly";
    t0 = Clock::now();
    ctx.mux_slots.acquire();
    std::optional<assembly::SummaryClip> clip;
    try {
      clip = assembly::assemble_summary_clip(
          ctx.media, ctx.video, segment, narration, ctx.config.cut_mode,
          ctx.staging / "clips" / numbered("summary", segment.index, ctx.config.clip_extension));
    } catch (...) {
      ctx.mux_slots.release();
      throw;
    }
    ctx.mux_slots.release();
    work.report.timings["assembly"] = seconds_since(t0);

    work.report.clip_duration = clip->duration.seconds();
    work.report.ok = true;
    work.artifacts.summary = std::move(summary);
    work.artifacts.clip = std::move(clip);
  } catch (const Error& e) {
    if (!degradable(e.code())) throw;
    spdlog::warn("segment {} degraded during {}: {}", segment.index, stage, e.what());
    work.failure = AdapterFailure{segment.index, stage, std::string(error_code_name(e.code())),
                                  e.what()};
    work.artifacts.error = stage + ": " + e.what();
    work.artifacts.summary.reset();
    work.artifacts.clip.reset();
  }
  return work;
}

// Runs `fn(i)` for i in [0, n) on up to `threads` workers. The first
// exception stops further work and is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; !abort && (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        abort = true;
      }
    }
  };
  const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json budget_json(const std::optional<catalog::BudgetEntry>& b) {
  if (!b) return nullptr;
  return {{"L_t", b->transcript_words}, {"L_o", b->object_count}, {"L_c", b->ocr_words},
          {"N", b->target_words}};
}

std::string format_time(TimeCode t) { return t.to_string(); }

}  // namespace

std::size_t PipelineReport::succeeded() const {
  return static_cast<std::size_t>(
      std::count_if(segments.begin(), segments.end(), [](const auto& s) { return s.ok; }));
}

std::optional<double> PipelineReport::compression_ratio() const {
  if (succeeded() == 0 || summarized_original <= 0) return std::nullopt;
  return summary_total / summarized_original;
}

int PipelineReport::exit_code() const {
  const auto ok = succeeded();
  if (ok == 0) return 1;
  return ok == segments.size() ? 0 : 2;
}

json to_json(const PipelineReport& report) {
  json segments = json::array();
  for (const auto& s : report.segments) {
    segments.push_back({{"index", s.index},
                        {"start", s.start.seconds()},
                        {"end", s.end.seconds()},
                        {"original_duration", s.original_duration()},
                        {"status", s.ok ? "ok" : "degraded"},
                        {"budget", budget_json(s.budget)},
                        {"clip_duration", optional_number(s.clip_duration)},
                        {"timings", s.timings}});
  }
  json failures = json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"segment_index", f.segment_index},
                        {"stage", f.stage},
                        {"code", f.code},
                        {"message", f.message}});
  }
  return {{"video_id", report.video_id},
          {"manifest_dir", report.manifest_dir.string()},
          {"segments", std::move(segments)},
          {"totals",
           {{"original_duration", report.original_total},
            {"summarized_original_duration", report.summarized_original},
            {"summary_duration", report.summary_total},
            {"compression_ratio", optional_number(report.compression_ratio())},
            {"succeeded", report.succeeded()},
            {"degraded", report.segments.size() - report.succeeded()}}},
          {"failures", std::move(failures)}};
}

std::string default_video_id(const fs::path& video) {
  std::string id = video.stem().string();
  for (auto& c : id) {
    if (!server::valid_video_id(std::string(1, c))) c = '_';
  }
  return server::valid_video_id(id) ? id : "video";
}

PipelineReport process(const ProcessOptions& options, const PipelineConfig& config) {
  config.validate();
  const std::string video_id =
      options.video_id.empty() ? default_video_id(options.video) : options.video_id;
  if (!server::valid_video_id(video_id)) {
    throw Error(ErrorCode::kInvalidConfig, "invalid video id '" + video_id + "'");
  }
  const fs::path final_dir = options.out_root / video_id;
  std::error_code ec;
  if (fs::exists(final_dir, ec)) {
    throw Error(ErrorCode::kOutputExists, final_dir.string() + " already exists");
  }

  const MediaIo media(config.media);
  const MediaInfo info = media.probe(options.video);
  if (!info.has_video() || !info.has_audio()) {
    throw Error(ErrorCode::kUnreadableMedia,
                options.video.string() + " needs both a video and an audio stream");
  }
  spdlog::info("{}: {:.3f} s, {}x{} @ {} fps, {} Hz x{}", options.video.string(),
               info.duration.seconds(), info.width, info.height, info.fps, info.sample_rate,
               info.channels);

  fs::create_directories(options.out_root, ec);
  if (ec) throw Error(ErrorCode::kWriteFailed, "cannot create " + options.out_root.string());
  const fs::path staging =
      options.out_root / ("." + video_id + ".tmp-" + std::to_string(::getpid()));
  fs::remove_all(staging, ec);

  try {
    for (const char* sub : {"clips", "thumbs", "source", "work"}) {
      fs::create_directories(staging / sub);
    }
    const AudioBuffer audio = media.decode_audio(options.video, info, {TimeCode(0), info.duration});
    const auto segments = segment_video(media, options.video, info, audio, config);

    const std::string source_rel = "source/" + options.video.filename().string();
    link_or_copy(options.video, staging / source_rel);

    const AdapterSet adapters = config.make_adapters(fs::absolute(options.video));
    Semaphore mux_slots(config.mux_parallelism);
    const RunContext ctx{config, media, adapters, options.video, info, audio, staging, mux_slots};

    std::vector<SegmentWork> results(segments.size());
    parallel_for(segments.size(), config.parallelism,
                 [&](std::size_t i) { results[i] = process_segment(ctx, segments[i]); });

    PipelineReport report;
    report.video_id = video_id;
    report.manifest_dir = final_dir;
    std::vector<catalog::SegmentArtifacts> artifacts;
    for (auto& r : results) {
      report.original_total += r.report.original_duration();
      if (r.report.ok) {
        report.summarized_original += r.report.original_duration();
        report.summary_total += *r.report.clip_duration;
      }
      if (r.failure) report.failures.push_back(*r.failure);
      report.segments.push_back(r.report);
      artifacts.push_back(std::move(r.artifacts));
    }

    catalog::ManifestHeader header;
    header.video_id = video_id;
    header.title = options.title.empty() ? options.video.stem().string() : options.title;
    header.source_path = source_rel;
    header.duration = info.duration;
    header.created_at = utc_now();
    header.config_fingerprint = config.fingerprint();
    header.speech_weight = config.speech_weight;
    header.visual_weight = config.visual_weight;
    const auto manifest = catalog::build_manifest(header, artifacts, staging);
    catalog::write_manifest(manifest, staging);

    fs::remove_all(staging / "work");
    {
      std::ofstream out(staging / "report.json");
      out << to_json(report).dump(2) << "\n";
      if (!out) throw Error(ErrorCode::kWriteFailed, "cannot write report.json");
    }
    fs::rename(staging, final_dir, ec);
    if (ec) throw Error(ErrorCode::kWriteFailed, "cannot publish " + final_dir.string());
    spdlog::info("wrote {} ({} of {} segments summarized)", final_dir.string(),
                 report.succeeded(), report.segments.size());
    return report;
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

InspectReport inspect(const fs::path& manifest_dir) {
  const auto manifest = catalog::load_manifest(manifest_dir);
  InspectReport report;
  report.video_id = manifest.video_id;
  for (const auto& s : manifest.segments) {
    const double length = s.end.seconds() - s.start.seconds();
    report.rows.push_back({s.index, s.start, s.end, s.budget, s.summary_duration, s.status});
    report.original_total += length;
    if (s.summary_duration) {
      report.summarized_original += length;
      report.summary_total += *s.summary_duration;
    }
  }
  if (report.summarized_original > 0) {
    report.compression_ratio = report.summary_total / report.summarized_original;
  }
  return report;
}

std::string render_table(const InspectReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-5s %-12s %-12s %6s %6s %6s %6s %10s  %s\n", "index",
                "start", "end", "L_t", "L_c", "L_o", "N", "clip_s", "status");
  out << line;
  for (const auto& r : report.rows) {
    const auto num = [](const std::optional<catalog::BudgetEntry>& b, auto member) {
      return b ? std::to_string((*b).*member) : std::string("-");
    };
    char clip[32] = "-";
    if (r.clip_duration) std::snprintf(clip, sizeof clip, "%.3f", *r.clip_duration);
    std::snprintf(line, sizeof line, "%-5zu %-12s %-12s %6s %6s %6s %6s %10s  %s\n", r.index,
                  format_time(r.start).c_str(), format_time(r.end).c_str(),
                  num(r.budget, &catalog::BudgetEntry::transcript_words).c_str(),
                  num(r.budget, &catalog::BudgetEntry::ocr_words).c_str(),
                  num(r.budget, &catalog::BudgetEntry::object_count).c_str(),
                  num(r.budget, &catalog::BudgetEntry::target_words).c_str(), clip,
                  r.status.c_str());
    out << line;
  }
  if (report.compression_ratio) {
    std::snprintf(line, sizeof line,
                  "ratio %.4f (summary %.3f s / original %.3f s; video %.3f s)\n",
                  *report.compression_ratio, report.summary_total, report.summarized_original,
                  report.original_total);
  } else {
    std::snprintf(line, sizeof line, "ratio n/a (no summarized segments; video %.3f s)\n",
                  report.original_total);
  }
  out << line;
  return out.str();
}

json to_json(const InspectReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"index", r.index},
                    {"start", r.start.seconds()},
                    {"end", r.end.seconds()},
                    {"budget", budget_json(r.budget)},
                    {"clip_duration", optional_number(r.clip_duration)},
                    {"status", r.status}});
  }
  return {{"video_id", report.video_id},
          {"segments", std::move(rows)},
          {"totals",
           {{"original_duration", report.original_total},
            {"summarized_original_duration", report.summarized_original},
            {"summary_duration", report.summary_total},
            {"compression_ratio", optional_number(report.compression_ratio)}}}};
}

}  // namespace lecsum::pipeline
