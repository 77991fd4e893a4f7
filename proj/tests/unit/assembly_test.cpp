#include <gtest/gtest.h>

#include <random>

#include "lecsum/assembly.hpp"
#include "lecsum/error.hpp"
#include "lecsum/wav.hpp"
#include "test_support.hpp"

namespace lecsum::assembly {
namespace {

using lecsum::testing::TempDir;

Segment seg(double start, double end) { return {0, TimeCode(start), TimeCode(end)}; }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lecsum::Error thrown";
  return ErrorCode::kPrecondition;
}

TEST(Interval, MiddleBeginEnd) {
  const auto mid = select_video_interval(seg(0, 100), 20, CutMode::kMiddle);
  EXPECT_DOUBLE_EQ(mid.range.start.seconds(), 40);
  EXPECT_DOUBLE_EQ(mid.range.end.seconds(), 60);
  EXPECT_FALSE(mid.freeze_overflow);
  const auto begin = select_video_interval(seg(10, 110), 20, CutMode::kBegin);
  EXPECT_DOUBLE_EQ(begin.range.start.seconds(), 10);
  EXPECT_DOUBLE_EQ(begin.range.end.seconds(), 30);
  const auto end = select_video_interval(seg(10, 110), 20, CutMode::kEnd);
  EXPECT_DOUBLE_EQ(end.range.start.seconds(), 90);
  EXPECT_DOUBLE_EQ(end.range.end.seconds(), 110);
}

TEST(Interval, WholeSegmentWhenNarrationIsLonger) {
  const auto same = select_video_interval(seg(0, 100), 100);
  EXPECT_DOUBLE_EQ(same.range.end.seconds(), 100);
  EXPECT_FALSE(same.freeze_overflow);
  const auto over = select_video_interval(seg(0, 100), 120);
  EXPECT_DOUBLE_EQ(over.range.start.seconds(), 0);
  EXPECT_DOUBLE_EQ(over.range.end.seconds(), 100);
  EXPECT_TRUE(over.freeze_overflow);
  EXPECT_EQ(code_of([] { select_video_interval(seg(0, 10), 0); }), ErrorCode::kPrecondition);
}

TEST(Interval, MiddleCutProperties) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const double start = unit(rng) * 3600;
    const double length = 0.1 + unit(rng) * 600;
    const double d = 0.01 + unit(rng) * length * 1.5;
    const auto v = select_video_interval(seg(start, start + length), d);
    EXPECT_GE(v.range.start.seconds(), start - 1e-9);
    EXPECT_LE(v.range.end.seconds(), start + length + 1e-9);
    if (d <= length) {
      EXPECT_NEAR(v.range.length(), d, 1e-9);
      const double lead = v.range.start.seconds() - start;
      const double trail = start + length - v.range.end.seconds();
      EXPECT_NEAR(lead, trail, 1e-9);
    }
  }
}

AudioBuffer speech_with_gaps(const std::vector<std::pair<double, bool>>& parts) {
  AudioBuffer a;
  for (const auto& [seconds, loud] : parts) {
    const auto n = static_cast<std::size_t>(seconds * 16000);
    for (std::size_t i = 0; i < n; ++i) {
      a.samples.push_back(loud ? static_cast<std::int16_t>(8000 * std::sin(i * 0.1)) : 0);
    }
  }
  return a;
}

extraction::Transcript some_words() { return {0, {{"hello there", TimeCode(0), TimeCode(1)}}, 2}; }

TEST(Reference, LongestRunCapped) {
  TempDir dir;
  const auto ten = speech_with_gaps({{2, false}, {4, true}, {1, false}, {10, true}, {2, false}});
  const auto p = extract_reference_audio(ten, some_words(), {}, dir / "r.wav");
  EXPECT_NEAR(wav::read_header(p)->duration_seconds(), 10.0, 0.02);

  const auto long_speech = speech_with_gaps({{90, true}});
  const auto q = extract_reference_audio(long_speech, some_words(), {}, dir / "q.wav");
  EXPECT_NEAR(wav::read_header(q)->duration_seconds(), 30.0, 1e-3);
}

TEST(Reference, Errors) {
  TempDir dir;
  const auto silent = speech_with_gaps({{5, false}});
  EXPECT_EQ(code_of([&] { extract_reference_audio(silent, some_words(), {}, dir / "s.wav"); }),
            ErrorCode::kNoSpeechFound);
  EXPECT_EQ(code_of([&] {
              extract_reference_audio(speech_with_gaps({{5, true}}), {}, {}, dir / "s.wav");
            }),
            ErrorCode::kPrecondition);
}

std::string n_words(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += "word ";
  return s;
}

TEST(Narration, MockRateGivesDuration) {
  TempDir dir;
  const MediaIo media(lecsum::testing::synth_media_config());
  const MockAdapter tts(AdapterKind::kTts, {});
  const auto n = synthesize_narration(tts, media, n_words(50), "", dir / "n.wav", seg(0, 30));
  EXPECT_NEAR(n.duration.seconds(), 20.0, 1e-3);
  EXPECT_EQ(code_of([&] { synthesize_narration(tts, media, "  ", "", dir / "e.wav", seg(0, 1)); }),
            ErrorCode::kPrecondition);
  MockOptions no_file;
  no_file.mode = "no_file";
  EXPECT_EQ(code_of([&] {
              synthesize_narration(MockAdapter(AdapterKind::kTts, no_file), media, "hi", "",
                                   dir / "x.wav", seg(0, 1));
            }),
            ErrorCode::kAdapterFailure);
}

class ClipTest : public ::testing::Test {
 protected:
  void SetUp() override {
    synth::VideoSpec spec;
    spec.duration = 120;
    spec.scenes = {{0, 120, "gradient", {0, 0, 0}, {0, 0, 255}, 0}};
    synth::save(spec, dir_ / "v.lsv");
  }
  NarrationAudio narration(double seconds) {
    const fs::path p = dir_ / ("n" + std::to_string(seconds) + ".wav");
    wav::write(p, 16000, 1, std::vector<std::int16_t>(static_cast<std::size_t>(seconds * 16000), 5));
    return {p, TimeCode(seconds), {}};
  }
  TempDir dir_;
  MediaIo media_{lecsum::testing::synth_media_config()};
};

TEST_F(ClipTest, CentreOfLongSegment) {
  const auto clip = assemble_summary_clip(media_, dir_ / "v.lsv", seg(0, 100), narration(20),
                                          CutMode::kMiddle, dir_ / "c.lsc");
  EXPECT_NEAR(clip.duration.seconds(), 20, kClipDurationTolerance);
  EXPECT_DOUBLE_EQ(clip.video_interval.start.seconds(), 40);
  EXPECT_FALSE(clip.frozen_tail);
}

TEST_F(ClipTest, FrozenTailWhenNarrationOutlastsSegment) {
  const auto clip = assemble_summary_clip(media_, dir_ / "v.lsv", seg(50, 60), narration(12),
                                          CutMode::kMiddle, dir_ / "c.lsc");
  EXPECT_NEAR(clip.duration.seconds(), 12, kClipDurationTolerance);
  EXPECT_TRUE(clip.frozen_tail);
  EXPECT_DOUBLE_EQ(clip.video_interval.length(), 10);
}

TEST_F(ClipTest, ZeroNarrationIsPrecondition) {
  NarrationAudio empty{dir_ / "none.wav", TimeCode(0), {}};
  EXPECT_EQ(code_of([&] {
              assemble_summary_clip(media_, dir_ / "v.lsv", seg(0, 10), empty, CutMode::kMiddle,
                                    dir_ / "c.lsc");
            }),
            ErrorCode::kPrecondition);
}

}  // namespace
}  // namespace lecsum::assembly
