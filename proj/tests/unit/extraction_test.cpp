#include <gtest/gtest.h>

#include "fake_adapter.hpp"
#include "lecsum/error.hpp"
#include "lecsum/extraction.hpp"
#include "test_support.hpp"

namespace lecsum::extraction {
namespace {

using json = nlohmann::json;
using lecsum::testing::FakeAdapter;
using lecsum::testing::TempDir;

Segment seg(std::size_t index, double start, double end) {
  return {index, TimeCode(start), TimeCode(end)};
}

std::string words(std::size_t n, const std::string& stem = "w") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + stem + std::to_string(i);
  return out;
}

TEST(Keyframes, CountsFollowTheRate) {
  EXPECT_EQ(keyframe_times(seg(0, 0, 20), {2.0}).size(), 10u);
  EXPECT_EQ(keyframe_times(seg(0, 0, 20), {1.0}).size(), 20u);
  const auto one = keyframe_times(seg(0, 5, 6), {2.0});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0].seconds(), 5.5);
}

TEST(Keyframes, AlwaysIncludeMidpointAndStayInside) {
  for (double len : {0.3, 1.0, 7.7, 19.99, 20.0, 61.3}) {
    for (double interval : {0.5, 2.0, 3.3}) {
      const auto s = seg(0, 10, 10 + len);
      const auto times = keyframe_times(s, {interval});
      const double mid = 10 + len / 2;
      bool has_mid = false;
      for (const auto t : times) {
        EXPECT_GE(t, s.start);
        EXPECT_LT(t.seconds(), s.end.seconds());
        has_mid = has_mid || std::abs(t.seconds() - mid) < 1e-9;
      }
      EXPECT_TRUE(has_mid);
    }
  }
}

TEST(Ocr, StaticSlideCountsOnce) {
  const std::vector<std::string> slide{words(40)};
  EXPECT_EQ(merge_ocr(0, {slide, slide, slide}).word_count, 40u);
}

TEST(Ocr, BlankFramesAndDistinctSlides) {
  EXPECT_EQ(merge_ocr(0, {{}, {"   "}, {}}).word_count, 0u);
  EXPECT_EQ(merge_ocr(0, {{words(40, "a")}, {words(40, "b")}}).word_count, 80u);
  // A slide that returns after another one is read again.
  EXPECT_EQ(merge_ocr(0, {{"x y"}, {"z"}, {"x y"}}).word_count, 5u);
}

TEST(Objects, DistinctAboveFloor) {
  const std::vector<ObjectLabel> both{{"car", 0.9}, {"person", 0.8}};
  EXPECT_EQ(count_objects({both, both, both}, 0.5, ObjectCountMode::kDistinct), 2u);
  EXPECT_EQ(count_objects({{{"car", 0.2}}}, 0.5, ObjectCountMode::kDistinct), 0u);
  EXPECT_EQ(count_objects({{{"a", 1}}, {{"a", 1}, {"b", 1}}, {{"c", 1}}}, 0.5,
                          ObjectCountMode::kDistinct),
            3u);
  EXPECT_EQ(count_objects({{{"a", 1}}, {{"a", 1}, {"b", 1}}, {{"c", 1}}}, 0.5,
                          ObjectCountMode::kPerFrameSum),
            4u);
}

TEST(Transcribe, CountsWordsFromAdapter) {
  TempDir dir;
  FakeAdapter asr(AdapterKind::kAsr, [](const json&, int) {
    return json{{"segments", {{{"text", words(70)}, {"start", 0.5}, {"end", 4.0}},
                              {{"text", words(50)}, {"start", 4.0}, {"end", 9.0}}}}};
  });
  AudioBuffer audio;
  audio.samples.assign(16000 * 10, 0);
  const auto t = transcribe(asr, audio, seg(2, 30, 40), dir.path());
  EXPECT_EQ(t.word_count, 120u);
  EXPECT_EQ(t.segment_index, 2u);
  EXPECT_DOUBLE_EQ(t.pieces[0].start.seconds(), 30.5);
  EXPECT_EQ(asr.last_request()["context"]["segment_index"], 2);
  EXPECT_TRUE(fs::exists(asr.last_request()["audio_path"].get<std::string>()));
}

TEST(Transcribe, SilentSegmentThroughMockIsEmpty) {
  TempDir dir;
  MockAdapter asr(AdapterKind::kAsr, {});
  AudioBuffer audio;
  audio.samples.assign(16000 * 5, 0);
  EXPECT_EQ(transcribe(asr, audio, seg(0, 0, 5), dir.path()).word_count, 0u);
}

TEST(Transcribe, MalformedResponseIsAdapterFailure) {
  TempDir dir;
  const CommandAdapter asr(AdapterKind::kAsr,
                           lecsum::testing::quoted(lecsum::testing::kMockAdapterTool) +
                               " asr --mode malformed",
                           std::chrono::seconds(10));
  AudioBuffer audio;
  audio.samples.assign(1600, 0);
  try {
    transcribe(asr, audio, seg(0, 0, 0.1), dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAdapterFailure);
  }
  FakeAdapter shape(AdapterKind::kAsr, [](const json&, int) { return json{{"text", "hi"}}; });
  EXPECT_THROW(transcribe(shape, audio, seg(0, 0, 0.1), dir.path()), Error);
}

TEST(CommandAdapterTest, FailureAndTimeout) {
  const std::string tool = lecsum::testing::quoted(lecsum::testing::kMockAdapterTool);
  const json request = {{"prompt", "x"}, {"max_words", 50}, {"context", {{"segment_index", 1}}}};
  try {
    CommandAdapter(AdapterKind::kLlm, tool + " llm --fail-segments 1", std::chrono::seconds(5))
        .invoke(request);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAdapterFailure);
  }
  try {
    CommandAdapter(AdapterKind::kLlm, tool + " llm --mode slow", std::chrono::milliseconds(200))
        .invoke(request);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAdapterTimeout);
  }
  try {
    CommandAdapter(AdapterKind::kLlm, "/no/such/adapter", std::chrono::seconds(1)).invoke(request);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAdapterFailure);
  }
  const auto ok =
      CommandAdapter(AdapterKind::kLlm, tool + " llm", std::chrono::seconds(5)).invoke(request);
  EXPECT_EQ(count_words(ok["summary"].get<std::string>()), 50u);
}

TEST(Evidence, CarriesCountsAndChecksOwnership) {
  const auto s = seg(1, 20, 40);
  Transcript t{1, {{words(120), TimeCode(21), TimeCode(30)}}, 120};
  auto ocr = merge_ocr(1, {{words(40)}});
  auto objects = merge_objects(1, {{{"car", 0.9}, {"person", 0.8}}}, 0.5, ObjectCountMode::kDistinct);
  const auto e = aggregate_evidence(s, t, ocr, objects);
  EXPECT_EQ(e.transcript.word_count, 120u);
  EXPECT_EQ(e.ocr.word_count, 40u);
  EXPECT_EQ(e.objects.distinct_count, 2u);

  auto stray = ocr;
  stray.segment_index = 0;
  try {
    aggregate_evidence(s, t, stray, objects);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kInconsistentSegment);
  }
  auto lying = t;
  lying.word_count = 7;
  EXPECT_THROW(aggregate_evidence(s, lying, ocr, objects), Error);

  const auto empty = aggregate_evidence(s, Transcript{1, {}, 0}, merge_ocr(1, {}),
                                        merge_objects(1, {}, 0.5, ObjectCountMode::kDistinct));
  EXPECT_EQ(empty.transcript.word_count + empty.ocr.word_count + empty.objects.distinct_count, 0u);
}

TEST(Keyframes, SampledFromSyntheticVideo) {
  TempDir dir;
  synth::VideoSpec spec;
  spec.duration = 20;
  spec.scenes = {{0, 20, "gradient", {0, 0, 0}, {255, 0, 0}, 0}};
  synth::save(spec, dir / "v.lsv");
  const MediaIo media(lecsum::testing::synth_media_config());
  const auto info = media.probe(dir / "v.lsv");
  const auto set = sample_keyframes(media, dir / "v.lsv", info, seg(0, 0, 20), {2.0}, dir.path());
  ASSERT_EQ(set.frames.size(), 10u);
  ASSERT_EQ(set.images.size(), 10u);
  for (const auto& p : set.images) EXPECT_TRUE(fs::exists(p));
  EXPECT_DOUBLE_EQ(set.frames[5].timestamp.seconds(), 10.0);
}

}  // namespace
}  // namespace lecsum::extraction
