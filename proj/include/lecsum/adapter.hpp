#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lecsum {

namespace fs = std::filesystem;

// One model capability behind a JSON request/response contract:
//   asr:    {audio_path, sample_rate}         -> {segments:[{text,start,end}]}
//   ocr:    {image_paths:[...]}               -> {frames:[{lines:[...]}]}
//   objdet: {image_paths:[...]}               -> {frames:[{labels:[{name,confidence}]}]}
//   llm:    {prompt, max_words}               -> {title, summary}
//   tts:    {text, reference_audio_path, out_path} -> {audio_path, duration_seconds}
// Every request also carries a "context" object ({segment_index, start, end}
// and, for image requests, "timestamps"); adapters are free to ignore it.
enum class AdapterKind { kAsr, kOcr, kObjDet, kLlm, kTts };

std::string_view to_string(AdapterKind kind);
std::optional<AdapterKind> parse_adapter_kind(std::string_view name);

class Adapter {
 public:
  virtual ~Adapter() = default;
  virtual AdapterKind kind() const = 0;
  virtual std::string describe() const = 0;

  // Throws Error(kAdapterFailure) or Error(kAdapterTimeout).
  virtual nlohmann::json invoke(const nlohmann::json& request) const = 0;
};

// Runs an external command per call: request on stdin, response on stdout,
// nonzero exit is a failure.
class CommandAdapter final : public Adapter {
 public:
  CommandAdapter(AdapterKind kind, std::string command_line,
                 std::chrono::milliseconds timeout);

  AdapterKind kind() const override { return kind_; }
  std::string describe() const override;
  nlohmann::json invoke(const nlohmann::json& request) const override;

 private:
  AdapterKind kind_;
  std::string command_line_;
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
};

struct MockOptions {
  // JSON document with a "script" object (a synthetic video works).
  fs::path fixture;
  // ok | fail | empty | title_only | malformed | no_file | slow
  std::string mode = "ok";
  // Segments forced into mode "fail".
  std::vector<std::size_t> fail_segments;
  double words_per_second = 2.5;
  int sample_rate = 16000;
};

// Deterministic stand-ins used for tests and offline demos.
nlohmann::json mock_respond(AdapterKind kind, const MockOptions& options,
                            const nlohmann::json& request);

class MockAdapter final : public Adapter {
 public:
  MockAdapter(AdapterKind kind, MockOptions options);

  AdapterKind kind() const override { return kind_; }
  std::string describe() const override;
  nlohmann::json invoke(const nlohmann::json& request) const override;

 private:
  AdapterKind kind_;
  MockOptions options_;
};

struct AdapterSet {
  std::shared_ptr<const Adapter> asr;
  std::shared_ptr<const Adapter> ocr;
  std::shared_ptr<const Adapter> objdet;
  std::shared_ptr<const Adapter> llm;
  std::shared_ptr<const Adapter> tts;
};

}  // namespace lecsum
