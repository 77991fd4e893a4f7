#include "lecsum/adapter.hpp"

#include "lecsum/error.hpp"
#include "lecsum/subprocess.hpp"

namespace lecsum {

std::string_view to_string(AdapterKind kind) {
  switch (kind) {
    case AdapterKind::kAsr: return "asr";
    case AdapterKind::kOcr: return "ocr";
    case AdapterKind::kObjDet: return "objdet";
    case AdapterKind::kLlm: return "llm";
    case AdapterKind::kTts: return "tts";
  }
  return "unknown";
}

std::optional<AdapterKind> parse_adapter_kind(std::string_view name) {
  for (auto kind : {AdapterKind::kAsr, AdapterKind::kOcr, AdapterKind::kObjDet,
                    AdapterKind::kLlm, AdapterKind::kTts}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

CommandAdapter::CommandAdapter(AdapterKind kind, std::string command_line,
                               std::chrono::milliseconds timeout)
    : kind_(kind),
      command_line_(std::move(command_line)),
      argv_(split_command_line(command_line_)),
      timeout_(timeout) {
  if (argv_.empty()) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(to_string(kind_)) + " adapter command is empty");
  }
}

std::string CommandAdapter::describe() const {
  return std::string(to_string(kind_)) + " command '" + command_line_ + "'";
}

nlohmann::json CommandAdapter::invoke(const nlohmann::json& request) const {
  const std::string label(to_string(kind_));
  CommandResult result;
  try {
    result = run_command(argv_, request.dump(), timeout_);
  } catch (const SpawnFailure& e) {
    throw Error(ErrorCode::kAdapterFailure, label + ": " + e.what());
  } catch (const ProcessTimeout&) {
    throw Error(ErrorCode::kAdapterTimeout,
                label + " exceeded " + std::to_string(timeout_.count()) + " ms");
  }
  if (!result.status.ok()) {
    std::string err = result.err.substr(0, 400);
    while (!err.empty() && (err.back() == '\n' || err.back() == '\r')) err.pop_back();
    throw Error(ErrorCode::kAdapterFailure,
                label + " exited with " + std::to_string(result.status.code) +
                    (err.empty() ? "" : ": " + err));
  }
  try {
    auto response = nlohmann::json::parse(result.out);
    if (!response.is_object()) throw std::runtime_error("response is not an object");
    return response;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kAdapterFailure, label + " malformed response: " + e.what());
  }
}

MockAdapter::MockAdapter(AdapterKind kind, MockOptions options)
    : kind_(kind), options_(std::move(options)) {}

std::string MockAdapter::describe() const {
  return std::string(to_string(kind_)) + " built-in mock (" + options_.mode + ")";
}

nlohmann::json MockAdapter::invoke(const nlohmann::json& request) const {
  return mock_respond(kind_, options_, request);
}

}  // namespace lecsum
