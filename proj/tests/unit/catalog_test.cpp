#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <random>

#include "catalog_fixture.hpp"
#include "lecsum/catalog.hpp"
#include "lecsum/error.hpp"

namespace lecsum::catalog {
namespace {

using lecsum::testing::biology_texts;
using lecsum::testing::TempDir;
using lecsum::testing::write_fixture_manifest;
using lecsum::testing::write_text;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lecsum::Error thrown";
  return ErrorCode::kPrecondition;
}

std::vector<SegmentArtifacts> three_segments(const fs::path& dir) {
  std::vector<SegmentArtifacts> out;
  fs::create_directories(dir / "thumbs");
  fs::create_directories(dir / "clips");
  fs::create_directories(dir / "source");
  write_text(dir / "source" / "v.lsv", "video");
  for (std::size_t i = 0; i < 3; ++i) {
    SegmentArtifacts a;
    a.segment = {i, TimeCode(20.0 * i), TimeCode(20.0 * (i + 1))};
    a.thumbnail = dir / "thumbs" / ("t" + std::to_string(i) + ".png");
    write_text(a.thumbnail, "png");
    extraction::SegmentEvidence e;
    e.segment = a.segment;
    e.transcript = {i, {{"words here", a.segment.start, a.segment.end}}, 2};
    e.ocr = extraction::merge_ocr(i, {{"slide " + std::to_string(i)}});
    e.objects = extraction::merge_objects(i, {{{"desk", 0.9}}}, 0.5,
                                          extraction::ObjectCountMode::kDistinct);
    e.transcript.segment_index = i;
    a.evidence = e;
    a.summary = summarization::SummaryResult{"Title " + std::to_string(i), "Summary text",
                                             summarization::compute_summary_budget(e)};
    const fs::path clip = dir / "clips" / ("c" + std::to_string(i) + ".lsc");
    write_text(clip, "clip");
    a.clip = assembly::SummaryClip{i, a.segment.range(), clip, TimeCode(20), false};
    out.push_back(std::move(a));
  }
  return out;
}

ManifestHeader header() {
  ManifestHeader h;
  h.video_id = "lec";
  h.title = "Lecture";
  h.source_path = "source/v.lsv";
  h.duration = TimeCode(60);
  h.created_at = "2026-01-01T00:00:00Z";
  h.config_fingerprint = "abc";
  return h;
}

TEST(BuildManifest, ThreeCompleteSegments) {
  TempDir dir;
  const auto m = build_manifest(header(), three_segments(dir.path()), dir.path());
  ASSERT_EQ(m.segments.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(m.segments[i].index, i);
    EXPECT_TRUE(m.segments[i].has_summary());
    EXPECT_EQ(m.segments[i].thumbnail, "thumbs/t" + std::to_string(i) + ".png");
    EXPECT_EQ(m.segments[i].budget->target_words, 50);
  }
}

TEST(BuildManifest, DegradedSegmentKeepsOriginalOnly) {
  TempDir dir;
  auto parts = three_segments(dir.path());
  parts[1].summary.reset();
  parts[1].clip.reset();
  parts[1].error = "llm: boom";
  const auto m = build_manifest(header(), parts, dir.path());
  EXPECT_EQ(m.segments[1].status, "degraded");
  EXPECT_FALSE(m.segments[1].title);
  EXPECT_FALSE(m.segments[1].summary_clip);
  EXPECT_EQ(*m.segments[1].error, "llm: boom");
  EXPECT_TRUE(m.segments[1].budget);
}

TEST(BuildManifest, MissingFilesAreNamed) {
  TempDir dir;
  auto parts = three_segments(dir.path());
  fs::remove(parts[2].thumbnail);
  try {
    build_manifest(header(), parts, dir.path());
    FAIL();
  } catch (const MissingArtifactError& e) {
    EXPECT_EQ(e.segment_index(), 2u);
    EXPECT_EQ(e.artifact(), "thumbnail");
  }
  write_text(parts[2].thumbnail, "png");
  fs::remove(parts[0].clip->clip_path);
  try {
    build_manifest(header(), parts, dir.path());
    FAIL();
  } catch (const MissingArtifactError& e) {
    EXPECT_EQ(e.segment_index(), 0u);
    EXPECT_EQ(e.artifact(), "summary_clip");
  }
  EXPECT_EQ(code_of([&] { build_manifest(header(), {}, dir.path()); }), ErrorCode::kPrecondition);
}

TEST(BuildManifest, RejectsGapsAndBadBudgets) {
  TempDir dir;
  auto parts = three_segments(dir.path());
  parts[2].segment.start = TimeCode(41);
  EXPECT_THROW(build_manifest(header(), parts, dir.path()), Error);
}

TEST(ManifestIo, RoundTrip) {
  TempDir dir;
  auto parts = three_segments(dir.path());
  parts[2].summary.reset();
  parts[2].clip.reset();
  const auto m = build_manifest(header(), parts, dir.path());
  write_manifest(m, dir.path());
  EXPECT_EQ(load_manifest(dir.path()), m);
}

TEST(ManifestIo, SchemaMismatchAndCorruption) {
  TempDir dir;
  const auto m = build_manifest(header(), three_segments(dir.path()), dir.path());
  write_manifest(m, dir.path());
  const std::string text = lecsum::testing::read_text(dir / "manifest.json");

  auto doc = nlohmann::json::parse(text);
  doc["schema_version"] = 7;
  write_text(dir / "manifest.json", doc.dump());
  EXPECT_EQ(code_of([&] { load_manifest(dir.path()); }), ErrorCode::kSchemaVersionMismatch);

  write_text(dir / "manifest.json", text.substr(0, text.size() / 2));
  EXPECT_EQ(code_of([&] { load_manifest(dir.path()); }), ErrorCode::kCorruptManifest);

  doc = nlohmann::json::parse(text);
  doc["segments"][0]["thumbnail"] = "../../etc/passwd";
  write_text(dir / "manifest.json", doc.dump());
  EXPECT_EQ(code_of([&] { load_manifest(dir.path()); }), ErrorCode::kCorruptManifest);

  fs::remove(dir / "manifest.json");
  EXPECT_EQ(code_of([&] { load_manifest(dir.path()); }), ErrorCode::kCorruptManifest);
  EXPECT_EQ(code_of([&] { write_manifest(m, dir / "missing"); }), ErrorCode::kWriteFailed);
}

TEST(Search, Examples) {
  TempDir dir;
  auto texts = biology_texts();
  const auto m = write_fixture_manifest(dir.path(), "bio", texts);

  const auto mito = search(m, "mitochondria");
  ASSERT_EQ(mito.size(), 1u);
  EXPECT_EQ(mito[0].segment_index, 2u);
  EXPECT_EQ(mito[0].field, SearchField::kTranscript);

  const auto dna = search(m, "dna");
  ASSERT_GE(dna.size(), 2u);
  EXPECT_EQ(dna[0].segment_index, 0u);
  EXPECT_EQ(dna[0].field, SearchField::kTitle);
  EXPECT_EQ(dna[1].field, SearchField::kSummary);

  EXPECT_TRUE(search(m, "photosynthesis").empty());
  EXPECT_EQ(code_of([&] { search(m, "   "); }), ErrorCode::kEmptyQuery);
}

TEST(Search, SnippetContainsEveryReportedMatch) {
  TempDir dir;
  std::vector<lecsum::testing::SegmentTexts> texts{
      {"t", "s", std::string(100, 'x') + " Needle " + std::string(100, 'y') + " needle", "", false}};
  const auto hits = search(write_fixture_manifest(dir.path(), "n", texts), "NEEDLE");
  ASSERT_EQ(hits.size(), 1u);
  ASSERT_FALSE(hits[0].match_offsets.empty());
  for (auto off : hits[0].match_offsets) {
    std::string found = hits[0].snippet.substr(off, 6);
    std::transform(found.begin(), found.end(), found.begin(), ::tolower);
    EXPECT_EQ(found, "needle");
  }
}

TEST(Search, AgreesWithBruteForceScan) {
  TempDir dir;
  std::mt19937 rng(41);
  const std::vector<std::string> vocab{"cell", "DNA", "Helix", "ribosome", "ATP", "energy",
                                       "lipid", "protein", "gene", "codon"};
  auto sentence = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
    return s;
  };
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<lecsum::testing::SegmentTexts> texts;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      texts.push_back({sentence(3), sentence(10), sentence(30), sentence(5), rng() % 4 == 0});
    }
    const auto m = write_fixture_manifest(dir.path(), "v" + std::to_string(trial), texts);
    for (const auto& q : {std::string("dna"), std::string("HELIX"), std::string("o"),
                          std::string("ene"), std::string("zzz"), std::string("cell dna")}) {
      std::vector<std::pair<std::size_t, SearchField>> expected;
      auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
      };
      for (const auto& s : m.segments) {
        const std::pair<SearchField, std::string> fields[] = {
            {SearchField::kTitle, s.title.value_or("")},
            {SearchField::kSummary, s.summary_text.value_or("")},
            {SearchField::kTranscript, s.transcript},
            {SearchField::kOcr, s.ocr_text}};
        for (const auto& [f, text] : fields) {
          if (lower(text).find(lower(q)) != std::string::npos) expected.emplace_back(s.index, f);
        }
      }
      std::vector<std::pair<std::size_t, SearchField>> got;
      for (const auto& h : search(m, q)) got.emplace_back(h.segment_index, h.field);
      EXPECT_EQ(got, expected) << q;
    }
  }
}

TEST(Manifest, MediaPathsAreDeduplicated) {
  TempDir dir;
  const auto m = write_fixture_manifest(dir.path(), "bio", biology_texts());
  const auto paths = m.media_paths();
  EXPECT_EQ(paths.size(), 1u + 3u + 3u);
  EXPECT_TRUE(std::is_sorted(paths.begin(), paths.end()));
}

}  // namespace
}  // namespace lecsum::catalog
