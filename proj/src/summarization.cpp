#include "lecsum/summarization.hpp"

#include <algorithm>
#include <cmath>

#include "lecsum/error.hpp"

namespace lecsum::summarization {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string or_none(const std::string& s) { return s.empty() ? "(none)" : s; }

enum class Outcome { kOk, kEmpty, kMalformed };

}  // namespace

long long target_word_count(std::size_t transcript_words, std::size_t object_count,
                            std::size_t ocr_words, double speech_weight,
                            double visual_weight) {
  if (speech_weight < 0 || visual_weight < 0) {
    throw Error(ErrorCode::kPrecondition, "summary weights must be non-negative");
  }
  const long double raw =
      static_cast<long double>(speech_weight) * transcript_words +
      static_cast<long double>(visual_weight) * (object_count + ocr_words);
  // Half-up rounding; the epsilon absorbs binary error in products like 0.3*5.
  const auto rounded = static_cast<long long>(std::floor(raw + 0.5L + 1e-9L));
  return std::max(kMinimumWords, rounded);
}

SummaryBudget compute_summary_budget(const extraction::SegmentEvidence& evidence,
                                     double speech_weight, double visual_weight) {
  SummaryBudget b;
  b.transcript_words = evidence.transcript.word_count;
  b.object_count = evidence.objects.distinct_count;
  b.ocr_words = evidence.ocr.word_count;
  b.speech_weight = speech_weight;
  b.visual_weight = visual_weight;
  b.target_words = target_word_count(b.transcript_words, b.object_count, b.ocr_words,
                                     speech_weight, visual_weight);
  return b;
}

std::string build_prompt(const extraction::SegmentEvidence& evidence,
                         const SummaryBudget& budget) {
  std::string objects;
  for (const auto& name : evidence.objects.distinct_labels()) {
    if (!objects.empty()) objects += ", ";
    objects += name;
  }
  std::string prompt(kInstruction);
  prompt += "\n\nTRANSCRIPTION:\n" + or_none(evidence.transcript.text());
  prompt += "\n\nOCR_TEXT:\n" + or_none(evidence.ocr.deduplicated_text);
  prompt += "\n\nOBJECTS:\n" + or_none(objects);
  prompt += "\n\nLimit the summary to approximately " +
            std::to_string(budget.target_words) + " words.\n";
  prompt += "Also provide a one-line title for this segment.\n";
  return prompt;
}

SummaryResult summarize_segment(const Adapter& llm, const std::string& prompt,
                                const SummaryBudget& budget,
                                const extraction::Segment& segment) {
  const nlohmann::json request = {{"prompt", prompt},
                                  {"max_words", budget.target_words},
                                  {"context", extraction::request_context(segment)}};
  Outcome last = Outcome::kMalformed;
  std::string detail;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const nlohmann::json response = llm.invoke(request);
    const auto title_it = response.find("title");
    const auto summary_it = response.find("summary");
    if (title_it == response.end() || summary_it == response.end() ||
        !title_it->is_string() || !summary_it->is_string()) {
      last = Outcome::kMalformed;
      detail = "response lacks string 'title' and 'summary'";
      continue;
    }
    SummaryResult result{trim(title_it->get<std::string>()),
                         trim(summary_it->get<std::string>()), budget};
    if (result.summary_text.empty()) {
      last = Outcome::kEmpty;
      detail = "summary is empty";
      continue;
    }
    if (result.title.empty()) {
      last = Outcome::kMalformed;
      detail = "title is empty";
      continue;
    }
    // A title is one line.
    result.title = trim(result.title.substr(0, result.title.find('\n')));
    return result;
  }
  const std::string where = "segment " + std::to_string(segment.index) + ": ";
  if (last == Outcome::kEmpty) throw Error(ErrorCode::kEmptySummary, where + detail);
  throw Error(ErrorCode::kAdapterFailure, where + "llm malformed response: " + detail);
}

}  // namespace lecsum::summarization
