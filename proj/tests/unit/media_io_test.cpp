#include <gtest/gtest.h>

#include "lecsum/error.hpp"
#include "lecsum/image.hpp"
#include "lecsum/media_io.hpp"
#include "lecsum/wav.hpp"
#include "test_support.hpp"

namespace lecsum {
namespace {

using lecsum::testing::synth_media_config;
using lecsum::testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lecsum::Error thrown";
  return ErrorCode::kPrecondition;
}

class MediaIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    synth::VideoSpec spec;
    spec.width = 320;
    spec.height = 240;
    spec.fps = 10;
    spec.duration = 60;
    spec.scenes = {{0, 30, "solid", {10, 20, 30}, {0, 0, 0}, 0},
                   {30, 60, "gradient", {0, 0, 0}, {255, 255, 255}, 0}};
    spec.audio = {{0, 60, "tone", 440, -12, false}};
    video_ = dir_ / "lecture.lsv";
    synth::save(spec, video_);
  }

  TempDir dir_;
  fs::path video_;
  MediaIo media_{synth_media_config()};
};

TEST_F(MediaIoTest, ProbeReportsFixtureProperties) {
  const auto info = media_.probe(video_);
  EXPECT_DOUBLE_EQ(info.duration.seconds(), 60.0);
  EXPECT_DOUBLE_EQ(info.fps, 10.0);
  EXPECT_EQ(info.width, 320);
  EXPECT_EQ(info.height, 240);
  EXPECT_EQ(info.sample_rate, 16000);
}

TEST_F(MediaIoTest, ProbeErrors) {
  EXPECT_EQ(code_of([&] { media_.probe(dir_ / "missing.mp4"); }), ErrorCode::kFileNotFound);
  lecsum::testing::write_text(dir_ / "notes.mp4", "just some text\n");
  EXPECT_EQ(code_of([&] { media_.probe(dir_ / "notes.mp4"); }), ErrorCode::kUnreadableMedia);
  auto cfg = synth_media_config();
  cfg.probe_command = "no-such-decoder-binary {input}";
  const MediaIo broken(cfg);
  EXPECT_EQ(code_of([&] { broken.probe(video_); }), ErrorCode::kDecoderUnavailable);
}

TEST_F(MediaIoTest, DecodesEveryFrameAndStrides) {
  const auto all = media_.decode_frames(video_, {TimeCode(0), TimeCode(60)}, 1);
  ASSERT_EQ(all.size(), 600u);
  for (std::size_t i = 0; i < all.size(); ++i) {
    ASSERT_EQ(all[i].index, static_cast<std::int64_t>(i));
    ASSERT_TRUE(all[i].valid());
  }
  const auto strided = media_.decode_frames(video_, {TimeCode(0), TimeCode(60)}, 10);
  ASSERT_EQ(strided.size(), 60u);
  for (std::size_t i = 0; i < strided.size(); ++i) {
    EXPECT_EQ(strided[i].index, static_cast<std::int64_t>(10 * i));
  }
  EXPECT_EQ(code_of([&] { media_.decode_frames(video_, {TimeCode(10), TimeCode(5)}, 1); }),
            ErrorCode::kRangeOutOfBounds);
  EXPECT_EQ(code_of([&] { media_.decode_frames(video_, {TimeCode(0), TimeCode(61)}, 1); }),
            ErrorCode::kRangeOutOfBounds);
}

TEST_F(MediaIoTest, DecodesAudio) {
  const auto full = media_.decode_audio(video_, {TimeCode(0), TimeCode(60)});
  EXPECT_NEAR(static_cast<double>(full.samples.size()), 960000.0, 1.0);
  const auto empty = media_.decode_audio(video_, {TimeCode(5), TimeCode(5)});
  EXPECT_TRUE(empty.samples.empty());
  EXPECT_EQ(empty.duration().seconds(), 0.0);
}

TEST_F(MediaIoTest, StereoOppositeChannelsDownmixToSilence) {
  synth::VideoSpec spec;
  spec.duration = 2;
  spec.channels = 2;
  spec.audio = {{0, 2, "tone", 300, -6, true}};
  synth::save(spec, dir_ / "stereo.lsv");
  const auto mono = media_.decode_audio(dir_ / "stereo.lsv", {TimeCode(0), TimeCode(2)});
  ASSERT_EQ(mono.samples.size(), 32000u);
  for (auto s : mono.samples) ASSERT_EQ(s, 0);
}

TEST_F(MediaIoTest, ThumbnailScalesAndReportsWriteFailures) {
  const auto frames = media_.decode_frames(video_, {TimeCode(0), TimeCode(0.1)}, 1);
  ASSERT_EQ(frames.size(), 1u);
  auto cfg = synth_media_config();
  cfg.thumbnail_max_width = 160;
  const MediaIo media(cfg);
  const auto path = media.render_thumbnail(frames[0], dir_ / "thumb.png");
  const auto size = image::read_size(path);
  ASSERT_TRUE(size);
  EXPECT_EQ(size->width, 160);
  EXPECT_EQ(size->height, 120);

  cfg.thumbnail_max_width = 1000;
  const auto full = MediaIo(cfg).render_thumbnail(frames[0], dir_ / "full.png");
  EXPECT_EQ(image::read_size(full)->width, 320);

  EXPECT_EQ(code_of([&] { media.render_thumbnail(frames[0], dir_ / "nope" / "t.png"); }),
            ErrorCode::kWriteFailed);
  cfg.image_format = "jpg";
  EXPECT_EQ(code_of([&] { MediaIo(cfg).render_thumbnail(frames[0], dir_ / "t.jpg"); }),
            ErrorCode::kEncoderUnavailable);
}

void write_narration(const fs::path& path, double seconds) {
  std::vector<std::int16_t> pcm(static_cast<std::size_t>(seconds * 16000), 100);
  wav::write(path, 16000, 1, pcm);
}

TEST_F(MediaIoTest, MuxMatchesNarrationAndFreezesOverflow) {
  write_narration(dir_ / "n20.wav", 20);
  const auto equal =
      media_.mux_clip(video_, {TimeCode(20), TimeCode(40)}, dir_ / "n20.wav", dir_ / "a.lsc");
  EXPECT_NEAR(equal.duration.seconds(), 20.0, kClipDurationTolerance);

  write_narration(dir_ / "n12.wav", 12);
  const auto frozen =
      media_.mux_clip(video_, {TimeCode(40), TimeCode(50)}, dir_ / "n12.wav", dir_ / "b.lsc");
  EXPECT_NEAR(frozen.duration.seconds(), 12.0, kClipDurationTolerance);
  // The last 2 s repeat the interval's final frame.
  const auto tail = media_.decode_frames(frozen.path, {TimeCode(9.5), TimeCode(12)}, 1);
  ASSERT_FALSE(tail.empty());
  for (const auto& f : tail) EXPECT_EQ(f.pixels, tail.front().pixels);
  const auto source_last = media_.decode_frames(video_, {TimeCode(49.9), TimeCode(50)}, 1);
  ASSERT_EQ(source_last.size(), 1u);
  EXPECT_EQ(tail.back().pixels, source_last[0].pixels);

  EXPECT_EQ(code_of([&] {
              media_.mux_clip(video_, {TimeCode(0), TimeCode(10)}, dir_ / "missing.wav",
                              dir_ / "c.lsc");
            }),
            ErrorCode::kPrecondition);
  auto cfg = synth_media_config();
  cfg.mux_command = "no-such-muxer {input} {output}";
  EXPECT_EQ(code_of([&] {
              MediaIo(cfg).mux_clip(video_, {TimeCode(0), TimeCode(10)}, dir_ / "n12.wav",
                                    dir_ / "d.lsc");
            }),
            ErrorCode::kMuxerUnavailable);
}

TEST(MediaIoHelpers, FirstFrameIndex) {
  EXPECT_EQ(first_frame_at_or_after(0.0, 10), 0);
  EXPECT_EQ(first_frame_at_or_after(0.1, 10), 1);
  EXPECT_EQ(first_frame_at_or_after(0.15, 10), 2);
  EXPECT_EQ(first_frame_at_or_after(20.0, 29.97), 600);
}

}  // namespace
}  // namespace lecsum
