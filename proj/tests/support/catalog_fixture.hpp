#pragma once

#include <random>
#include <string>
#include <vector>

#include "lecsum/catalog.hpp"
#include "test_support.hpp"

namespace lecsum::testing {

struct SegmentTexts {
  std::string title;
  std::string summary;
  std::string transcript;
  std::string ocr;
  bool degraded = false;
};

inline void write_random_file(const fs::path& path, std::size_t size, std::uint32_t seed) {
  fs::create_directories(path.parent_path());
  std::mt19937 rng(seed);
  std::string bytes(size, '\0');
  for (auto& b : bytes) b = static_cast<char>(rng() & 0xff);
  write_text(path, bytes);
}

// Writes `<root>/<id>/` with a manifest over 20 s segments and random media
// bytes (1000-byte clips) so byte ranges are easy to reason about.
inline catalog::Manifest write_fixture_manifest(const fs::path& root, const std::string& id,
                                                const std::vector<SegmentTexts>& texts) {
  const fs::path dir = root / id;
  catalog::Manifest m;
  m.video_id = id;
  m.title = "Fixture " + id;
  m.source_path = "source/lecture.lsv";
  m.duration = TimeCode(20.0 * static_cast<double>(texts.size()));
  m.created_at = "2026-01-01T00:00:00Z";
  m.config_fingerprint = "0000000000000000";
  write_random_file(dir / m.source_path, 4096, 1);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    catalog::SegmentEntry e;
    e.index = i;
    e.start = TimeCode(20.0 * static_cast<double>(i));
    e.end = TimeCode(20.0 * static_cast<double>(i + 1));
    e.original_clip = m.source_path;
    e.thumbnail = "thumbs/segment_00" + std::to_string(i) + ".png";
    write_random_file(dir / e.thumbnail, 300 + i, static_cast<std::uint32_t>(10 + i));
    e.transcript = texts[i].transcript;
    e.ocr_text = texts[i].ocr;
    e.budget = catalog::BudgetEntry{extraction::count_words(e.transcript), 0,
                                    extraction::count_words(e.ocr_text), 0};
    e.budget->target_words = summarization::target_word_count(
        e.budget->transcript_words, 0, e.budget->ocr_words, m.speech_weight, m.visual_weight);
    if (texts[i].degraded) {
      e.status = "degraded";
      e.error = "llm: forced failure";
    } else {
      e.title = texts[i].title;
      e.summary_text = texts[i].summary;
      e.summary_clip = "clips/summary_00" + std::to_string(i) + ".lsc";
      e.summary_duration = 20.0;
      write_random_file(dir / *e.summary_clip, 1000, static_cast<std::uint32_t>(100 + i));
    }
    m.segments.push_back(std::move(e));
  }
  catalog::write_manifest(m, dir);
  write_text(dir / "report.json", "{\"secret\": true}\n");
  return m;
}

inline std::vector<SegmentTexts> biology_texts() {
  return {
      {"DNA and the double helix", "An overview of DNA structure.",
       "Today we look at DNA and how its two strands pair.", "DNA Structure\nbase pairs"},
      {"Cell membranes", "Lipid bilayers and transport proteins.",
       "Membranes separate the cell from its surroundings.", "Membranes"},
      {"Protein synthesis", "Ribosomes translate messenger RNA.",
       "Ribosomes read codons; mitochondria supply the energy.", "Translation"},
  };
}

}  // namespace lecsum::testing
