#include "lecsum/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "lecsum/error.hpp"
#include "lecsum/subprocess.hpp"

namespace lecsum {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kInputPlaceholder = "{input}";

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, what);
}

// Reads typed keys from one TOML table and rejects keys nobody asked for.
class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  bool present() const { return table_ != nullptr; }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const toml::node* node = find(key);
    if (node == nullptr) return;
    if constexpr (std::is_same_v<T, bool>) {
      out = require(node->value<bool>(), key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      out = static_cast<T>(require(node->value<std::int64_t>(), key, "an integer"));
    } else if constexpr (std::is_floating_point_v<T>) {
      out = require(node->value<double>(), key, "a number");
    } else {
      out = require(node->value<std::string>(), key, "a string");
    }
  }

  void read_seconds(const char* key, std::chrono::milliseconds& out) {
    double seconds = static_cast<double>(out.count()) / 1000.0;
    read(key, seconds);
    if (!(seconds > 0) || !std::isfinite(seconds)) invalid(qualified(key) + " must be positive");
    out = std::chrono::milliseconds(std::llround(seconds * 1000.0));
  }

  void read_indices(const char* key, std::vector<std::size_t>& out) {
    seen_.insert(key);
    const toml::node* node = find(key);
    if (node == nullptr) return;
    const auto* array = node->as_array();
    if (array == nullptr) invalid(qualified(key) + " must be an array of integers");
    out.clear();
    for (const auto& item : *array) {
      const auto v = item.value<std::int64_t>();
      if (!v || *v < 0) invalid(qualified(key) + " must hold non-negative integers");
      out.push_back(static_cast<std::size_t>(*v));
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    const toml::node* node = find(key);
    if (node != nullptr && !node->is_table()) invalid(qualified(key) + " must be a table");
    return Section(node ? node->as_table() : nullptr, qualified(key));
  }

  void finish() const {
    if (table_ == nullptr) return;
    for (const auto& [key, value] : *table_) {
      if (!seen_.contains(std::string(key.str()))) {
        invalid("unknown key " + qualified(std::string(key.str()).c_str()));
      }
    }
  }

 private:
  const toml::node* find(const char* key) const {
    return table_ ? table_->get(key) : nullptr;
  }

  std::string qualified(const char* key) const {
    return name_.empty() ? std::string(key) : name_ + "." + key;
  }

  template <typename V>
  V require(std::optional<V> v, const char* key, const char* what) const {
    if (!v) invalid(qualified(key) + " must be " + what);
    return *v;
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string, std::less<>> seen_;
};

fs::path resolve(const fs::path& base, const std::string& value) {
  if (value.empty() || value == kInputPlaceholder) return value;
  const fs::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

void read_adapter(Section& parent, const char* kind, AdapterConfig& out, const fs::path& base) {
  Section s = parent.child(kind);
  std::string fixture = out.mock.fixture.string();
  s.read("command", out.command);
  s.read("fixture", fixture);
  s.read("mode", out.mock.mode);
  s.read_indices("fail_segments", out.mock.fail_segments);
  s.read("words_per_second", out.mock.words_per_second);
  s.read("sample_rate", out.mock.sample_rate);
  s.finish();
  out.mock.fixture = resolve(base, fixture);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json adapter_json(const AdapterConfig& a) {
  if (!a.uses_mock()) return {{"command", a.command}};
  return {{"mock", a.mock.mode},
          {"fixture", a.mock.fixture.string()},
          {"fail_segments", a.mock.fail_segments},
          {"words_per_second", a.mock.words_per_second},
          {"sample_rate", a.mock.sample_rate}};
}

}  // namespace

PipelineConfig::PipelineConfig() { media.sample_rate = 16000; }

const AdapterConfig& PipelineConfig::adapter(AdapterKind kind) const {
  switch (kind) {
    case AdapterKind::kAsr: return asr;
    case AdapterKind::kOcr: return ocr;
    case AdapterKind::kObjDet: return objdet;
    case AdapterKind::kLlm: return llm;
    case AdapterKind::kTts: return tts;
  }
  return asr;
}

AdapterConfig& PipelineConfig::adapter(AdapterKind kind) {
  return const_cast<AdapterConfig&>(std::as_const(*this).adapter(kind));
}

void PipelineConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) invalid(what);
  };
  check(std::isfinite(speech_weight) && speech_weight >= 0, "summary.speech_weight must be >= 0");
  check(std::isfinite(visual_weight) && visual_weight >= 0, "summary.visual_weight must be >= 0");
  check(parallelism >= 1, "adapters.parallelism must be >= 1");
  check(mux_parallelism >= 1, "assembly.mux_parallelism must be >= 1");
  check(cut.threshold >= 0 && cut.threshold <= 1, "segmentation.cut_threshold must be in [0, 1]");
  check(cut.min_gap >= 0, "segmentation.cut_min_gap must be >= 0");
  check(cut.bins >= 1 && cut.bins <= 256, "segmentation.histogram_bins must be in [1, 256]");
  check(silence.hop > 0 && silence.window >= silence.hop,
        "segmentation: silence_window >= silence_hop > 0 required");
  check(silence.min_duration >= 0, "segmentation.silence_min_duration must be >= 0");
  check(min_segment > 0, "segmentation.min_segment must be > 0");
  check(keyframes.interval > 0, "extraction.keyframe_interval must be > 0");
  check(confidence_floor >= 0 && confidence_floor <= 1,
        "extraction.confidence_floor must be in [0, 1]");
  check(reference_max_seconds > 0, "assembly.reference_max_seconds must be > 0");
  check(!clip_extension.empty() &&
            clip_extension.find_first_of("/\\. ") == std::string::npos,
        "assembly.clip_extension must be a bare extension");
  check(media.sample_rate > 0, "media.sample_rate must be > 0");
  check(media.thumbnail_max_width > 0, "media.thumbnail_max_width must be > 0");
  check(media.image_format == "png" || media.image_format == "ppm" ||
            !media.image_encoder_command.empty(),
        "media.image_format '" + media.image_format + "' needs media.image_encoder");

  static const std::set<std::string> modes = {"ok",        "fail",      "empty", "title_only",
                                              "malformed", "no_file",   "slow"};
  for (auto kind : {AdapterKind::kAsr, AdapterKind::kOcr, AdapterKind::kObjDet, AdapterKind::kLlm,
                    AdapterKind::kTts}) {
    const auto& a = adapter(kind);
    const std::string name = "adapters." + std::string(to_string(kind));
    if (a.uses_mock()) {
      check(modes.contains(a.mock.mode), name + ".mode '" + a.mock.mode + "' is not a mock mode");
      check(a.mock.words_per_second > 0, name + ".words_per_second must be > 0");
      check(a.mock.sample_rate > 0, name + ".sample_rate must be > 0");
      continue;
    }
    const Argv argv = split_command_line(a.command);
    check(!argv.empty(), name + ".command is empty");
    check(executable_available(argv.front()),
          name + ".command: '" + argv.front() + "' is not executable");
  }
}

std::string PipelineConfig::fingerprint() const {
  json doc;
  doc["segmentation"] = {{"cut_threshold", cut.threshold},
                         {"cut_min_gap", cut.min_gap},
                         {"histogram_bins", cut.bins},
                         {"silence_threshold_db", silence.threshold_db},
                         {"silence_min_duration", silence.min_duration},
                         {"silence_window", silence.window},
                         {"silence_hop", silence.hop},
                         {"min_segment", min_segment},
                         {"fusion", fusion == segmentation::FusionMode::kUnion ? "union"
                                                                               : "intersection"}};
  doc["extraction"] = {{"keyframe_interval", keyframes.interval},
                       {"confidence_floor", confidence_floor},
                       {"object_count", object_count == extraction::ObjectCountMode::kDistinct
                                            ? "distinct"
                                            : "per_frame_sum"}};
  doc["summary"] = {{"speech_weight", speech_weight}, {"visual_weight", visual_weight}};
  doc["assembly"] = {{"cut_mode", assembly::to_string(cut_mode)},
                     {"clip_extension", clip_extension},
                     {"reference_max_seconds", reference_max_seconds}};
  doc["media"] = {{"probe", media.probe_command},
                  {"frames", media.frames_command},
                  {"audio", media.audio_command},
                  {"mux", media.mux_command},
                  {"image_encoder", media.image_encoder_command},
                  {"sample_rate", media.sample_rate},
                  {"image_format", media.image_format},
                  {"thumbnail_max_width", media.thumbnail_max_width}};
  doc["adapters"] = {{"asr", adapter_json(asr)},
                     {"ocr", adapter_json(ocr)},
                     {"objdet", adapter_json(objdet)},
                     {"llm", adapter_json(llm)},
                     {"tts", adapter_json(tts)}};
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(doc.dump())));
  return hex;
}

AdapterSet PipelineConfig::make_adapters(const fs::path& input) const {
  auto build = [&](AdapterKind kind) -> std::shared_ptr<const Adapter> {
    const auto& a = adapter(kind);
    if (a.uses_mock()) {
      MockOptions options = a.mock;
      if (options.fixture == kInputPlaceholder) options.fixture = input;
      return std::make_shared<MockAdapter>(kind, std::move(options));
    }
    const Argv argv = expand_command(a.command, {{"input", input.string()}});
    return std::make_shared<CommandAdapter>(kind, join_command_line(argv), adapter_timeout);
  };
  return AdapterSet{build(AdapterKind::kAsr), build(AdapterKind::kOcr),
                    build(AdapterKind::kObjDet), build(AdapterKind::kLlm),
                    build(AdapterKind::kTts)};
}

PipelineConfig parse_config(std::string_view toml_text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at line " << e.source().begin.line;
    invalid(msg.str());
  }

  PipelineConfig c;
  Section top(&root, "");

  Section seg = top.child("segmentation");
  seg.read("cut_threshold", c.cut.threshold);
  seg.read("cut_min_gap", c.cut.min_gap);
  seg.read("histogram_bins", c.cut.bins);
  seg.read("silence_threshold_db", c.silence.threshold_db);
  seg.read("silence_min_duration", c.silence.min_duration);
  seg.read("silence_window", c.silence.window);
  seg.read("silence_hop", c.silence.hop);
  seg.read("min_segment", c.min_segment);
  std::string fusion = "union";
  seg.read("fusion", fusion);
  if (fusion == "union") {
    c.fusion = segmentation::FusionMode::kUnion;
  } else if (fusion == "intersection") {
    c.fusion = segmentation::FusionMode::kIntersection;
  } else {
    invalid("segmentation.fusion must be 'union' or 'intersection'");
  }
  seg.finish();

  Section ext = top.child("extraction");
  ext.read("keyframe_interval", c.keyframes.interval);
  ext.read("confidence_floor", c.confidence_floor);
  std::string count_mode = "distinct";
  ext.read("object_count", count_mode);
  if (count_mode == "distinct") {
    c.object_count = extraction::ObjectCountMode::kDistinct;
  } else if (count_mode == "per_frame_sum") {
    c.object_count = extraction::ObjectCountMode::kPerFrameSum;
  } else {
    invalid("extraction.object_count must be 'distinct' or 'per_frame_sum'");
  }
  ext.finish();

  Section sum = top.child("summary");
  sum.read("speech_weight", c.speech_weight);
  sum.read("visual_weight", c.visual_weight);
  sum.finish();

  Section asm_ = top.child("assembly");
  std::string cut_mode = "middle";
  asm_.read("cut_mode", cut_mode);
  const auto mode = assembly::parse_cut_mode(cut_mode);
  if (!mode) invalid("assembly.cut_mode must be begin, middle or end");
  c.cut_mode = *mode;
  asm_.read("clip_extension", c.clip_extension);
  asm_.read("reference_max_seconds", c.reference_max_seconds);
  asm_.read("mux_parallelism", c.mux_parallelism);
  asm_.finish();

  Section media = top.child("media");
  media.read("probe", c.media.probe_command);
  media.read("frames", c.media.frames_command);
  media.read("audio", c.media.audio_command);
  media.read("mux", c.media.mux_command);
  media.read("image_encoder", c.media.image_encoder_command);
  media.read("sample_rate", c.media.sample_rate);
  media.read("image_format", c.media.image_format);
  media.read("thumbnail_max_width", c.media.thumbnail_max_width);
  media.read_seconds("probe_timeout", c.media.probe_timeout);
  media.finish();

  Section adapters = top.child("adapters");
  adapters.read_seconds("timeout", c.adapter_timeout);
  adapters.read("parallelism", c.parallelism);
  read_adapter(adapters, "asr", c.asr, base_dir);
  read_adapter(adapters, "ocr", c.ocr, base_dir);
  read_adapter(adapters, "objdet", c.objdet, base_dir);
  read_adapter(adapters, "llm", c.llm, base_dir);
  read_adapter(adapters, "tts", c.tts, base_dir);
  adapters.finish();

  Section output = top.child("output");
  std::string dir = c.output_dir.string();
  output.read("dir", dir);
  c.output_dir = resolve(base_dir, dir);
  output.finish();

  top.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), fs::absolute(path).parent_path());
}

}  // namespace lecsum
