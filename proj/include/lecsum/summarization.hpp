#pragma once

#include <string>
#include <string_view>

#include "lecsum/adapter.hpp"
#include "lecsum/extraction.hpp"

namespace lecsum::summarization {

inline constexpr double kDefaultSpeechWeight = 0.3;  // w_s
inline constexpr double kDefaultVisualWeight = 2.5;  // w_i
inline constexpr long long kMinimumWords = 50;

// Instruction block sent ahead of every segment's evidence.
inline constexpr std::string_view kInstruction =
    "Using the provided transcription of spoken content, OCR-derived textual "
    "data, and object detection information, synthesize a comprehensive "
    "summary. This summary should highlight the key themes and actions "
    "depicted in the video. Focus on distilling the essence of the video by "
    "combining insights from the transcription (which captures the spoken "
    "words), the OCR data (which provides text found within the video), and "
    "object detection (which identifies significant objects and actions).";

struct SummaryBudget {
  std::size_t transcript_words = 0;  // L_t
  std::size_t object_count = 0;      // L_o
  std::size_t ocr_words = 0;         // L_c
  double speech_weight = kDefaultSpeechWeight;  // w_s
  double visual_weight = kDefaultVisualWeight;  // w_i
  long long target_words = kMinimumWords;       // N

  friend bool operator==(const SummaryBudget&, const SummaryBudget&) = default;
};

struct SummaryResult {
  std::string title;
  std::string summary_text;
  SummaryBudget budget;
};

// N = max(50, round_half_up(w_s * L_t + w_i * (L_o + L_c))).
long long target_word_count(std::size_t transcript_words, std::size_t object_count,
                            std::size_t ocr_words, double speech_weight,
                            double visual_weight);

SummaryBudget compute_summary_budget(const extraction::SegmentEvidence& evidence,
                                     double speech_weight = kDefaultSpeechWeight,
                                     double visual_weight = kDefaultVisualWeight);

std::string build_prompt(const extraction::SegmentEvidence& evidence,
                         const SummaryBudget& budget);

// Calls the LLM adapter, retrying once on an empty or malformed response.
// Throws Error(kEmptySummary) if both attempts come back empty, otherwise
// Error(kAdapterFailure) / Error(kAdapterTimeout).
SummaryResult summarize_segment(const Adapter& llm, const std::string& prompt,
                                const SummaryBudget& budget,
                                const extraction::Segment& segment);

}  // namespace lecsum::summarization
