// Deterministic adapter speaking the JSON stdin/stdout protocol.
#include <CLI11.hpp>

#include <iostream>
#include <iterator>

#include "lecsum/adapter.hpp"
#include "lecsum/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic mock adapter (asr|ocr|objdet|llm|tts)"};
  std::string kind_name;
  lecsum::MockOptions options;
  std::string fixture;
  app.add_option("kind", kind_name, "adapter kind")->required();
  app.add_option("--fixture", fixture, "document with a \"script\" object");
  app.add_option("--mode", options.mode, "ok|fail|empty|title_only|malformed|no_file|slow");
  app.add_option("--fail-segments", options.fail_segments, "segments that fail")->delimiter(',');
  app.add_option("--words-per-second", options.words_per_second, "mock TTS speaking rate");
  app.add_option("--sample-rate", options.sample_rate, "mock TTS sample rate");
  CLI11_PARSE(app, argc, argv);

  const auto kind = lecsum::parse_adapter_kind(kind_name);
  if (!kind) {
    std::cerr << "unknown adapter kind: " << kind_name << "\n";
    return 64;
  }
  options.fixture = fixture;
  try {
    const std::string input{std::istreambuf_iterator<char>(std::cin), {}};
    const auto request = nlohmann::json::parse(input);
    const auto response = lecsum::mock_respond(*kind, options, request);
    if (options.mode == "malformed" && *kind != lecsum::AdapterKind::kLlm) {
      std::cout << "{not json";
      return 0;
    }
    std::cout << response.dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
