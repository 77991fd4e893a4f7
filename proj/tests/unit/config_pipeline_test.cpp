#include <gtest/gtest.h>

#include <cstdio>
#include <nlohmann/json.hpp>

#include "lecsum/config.hpp"
#include "lecsum/error.hpp"
#include "lecsum/pipeline.hpp"
#include "test_support.hpp"

namespace lecsum {
namespace {

using lecsum::testing::kCliTool;
using lecsum::testing::kFixtures;
using lecsum::testing::read_text;
using lecsum::testing::synth_pipeline_toml;
using lecsum::testing::TempDir;
using lecsum::testing::write_text;

const fs::path kLecture = kFixtures / "lecture60.lsv";

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lecsum::Error thrown";
  return ErrorCode::kPrecondition;
}

TEST(Config, EmptyDocumentKeepsDefaults) {
  const auto c = parse_config("", "/tmp");
  EXPECT_DOUBLE_EQ(c.speech_weight, 0.3);
  EXPECT_DOUBLE_EQ(c.visual_weight, 2.5);
  EXPECT_DOUBLE_EQ(c.min_segment, 15.0);
  EXPECT_EQ(c.parallelism, 4);
  EXPECT_EQ(c.fusion, segmentation::FusionMode::kUnion);
  EXPECT_TRUE(c.llm.uses_mock());
  EXPECT_EQ(c.fingerprint(), PipelineConfig().fingerprint());
}

TEST(Config, ShippedFilesParse) {
  const fs::path dir = fs::path(LECSUM_SOURCE_DIR) / "config";
  const auto d = load_config(dir / "default.toml");
  EXPECT_EQ(d.clip_extension, "mp4");
  const auto s = load_config(dir / "synthetic.toml");
  EXPECT_EQ(s.clip_extension, "lsc");
  EXPECT_EQ(s.asr.mock.fixture, "{input}");
}

TEST(Config, ReadsValues) {
  const auto c = parse_config(R"(
[segmentation]
cut_threshold = 0.4
min_segment = 10
fusion = "intersection"
[summary]
speech_weight = 0.5
[adapters]
parallelism = 2
[adapters.llm]
fixture = "script.json"
fail_segments = [1, 3]
[output]
dir = "results"
)",
                              "/base");
  EXPECT_DOUBLE_EQ(c.cut.threshold, 0.4);
  EXPECT_DOUBLE_EQ(c.min_segment, 10.0);
  EXPECT_EQ(c.fusion, segmentation::FusionMode::kIntersection);
  EXPECT_DOUBLE_EQ(c.speech_weight, 0.5);
  EXPECT_EQ(c.parallelism, 2);
  EXPECT_EQ(c.llm.mock.fixture, "/base/script.json");
  EXPECT_EQ(c.llm.mock.fail_segments, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(c.output_dir, "/base/results");
}

TEST(Config, RejectsBadDocuments) {
  for (const char* doc : {"[segmentation]\ncut_treshold = 0.4\n",
                          "[bogus]\n",
                          "[summary]\nspeech_weight = -0.1\n",
                          "[summary]\nvisual_weight = \"high\"\n",
                          "[adapters]\nparallelism = 0\n",
                          "[segmentation]\nfusion = \"both\"\n",
                          "[adapters.llm]\ncommand = \"/nonexistent/llm-binary --x\"\n",
                          "[adapters.llm]\nfail_segments = [-1]\n",
                          "not toml = = ="}) {
    EXPECT_EQ(code_of([&] { parse_config(doc, "/tmp").validate(); }), ErrorCode::kInvalidConfig)
        << doc;
  }
  EXPECT_EQ(code_of([] { load_config("/nonexistent/config.toml"); }), ErrorCode::kInvalidConfig);
}

TEST(Config, FingerprintTracksOutputSettings) {
  const auto a = parse_config("[summary]\nspeech_weight = 0.3\n", "/tmp");
  const auto b = parse_config("", "/tmp");
  const auto c = parse_config("[summary]\nspeech_weight = 0.31\n", "/tmp");
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 16u);
}

class PipelineTest : public ::testing::Test {
 protected:
  PipelineConfig config(const std::string& extra_llm = "", int parallelism = 4) {
    auto c = parse_config(synth_pipeline_toml(extra_llm, parallelism), dir_.path());
    c.validate();
    return c;
  }
  pipeline::ProcessOptions options(const std::string& id = "lec") {
    return {kLecture, dir_ / "out", id, "Lecture"};
  }
  TempDir dir_;
};

TEST_F(PipelineTest, LectureFixtureEndToEnd) {
  const auto report = pipeline::process(options(), config());
  EXPECT_EQ(report.exit_code(), 0);
  ASSERT_EQ(report.segments.size(), 3u);
  EXPECT_TRUE(report.failures.empty());

  const auto m = catalog::load_manifest(report.manifest_dir);
  ASSERT_EQ(m.segments.size(), 3u);
  const double cuts[] = {0, 20, 40, 60};
  const long long expected_n[] = {50, 50, 60};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s = m.segments[i];
    EXPECT_NEAR(s.start.seconds(), cuts[i], 0.11);
    EXPECT_NEAR(s.end.seconds(), cuts[i + 1], 0.11);
    ASSERT_TRUE(s.budget);
    EXPECT_EQ(s.budget->target_words, expected_n[i]);
    ASSERT_TRUE(s.summary_text);
    EXPECT_EQ(extraction::count_words(*s.summary_text), expected_n[i]);
    EXPECT_TRUE(fs::exists(report.manifest_dir / *s.summary_clip));
    EXPECT_TRUE(fs::exists(report.manifest_dir / s.thumbnail));
    EXPECT_TRUE(fs::exists(report.manifest_dir / s.original_clip));
  }
  ASSERT_TRUE(report.compression_ratio());
  EXPECT_NEAR(*report.compression_ratio(), 64.0 / 60.0, 0.01);

  // Nothing but the final directory is left behind.
  std::vector<fs::path> left;
  for (const auto& e : fs::directory_iterator(dir_ / "out")) left.push_back(e.path());
  EXPECT_EQ(left, std::vector<fs::path>{report.manifest_dir});
  EXPECT_TRUE(fs::exists(report.manifest_dir / "report.json"));
}

TEST_F(PipelineTest, SegmentsTileTheVideo) {
  for (int parallelism : {1, 3}) {
    const auto report =
        pipeline::process(options("p" + std::to_string(parallelism)), config("", parallelism));
    double total = 0.0;
    double cursor = 0.0;
    for (const auto& s : report.segments) {
      EXPECT_NEAR(s.start.seconds(), cursor, 1e-9);
      cursor = s.end.seconds();
      total += s.original_duration();
    }
    EXPECT_NEAR(total, 60.0, 1e-6);
    EXPECT_NEAR(report.original_total, 60.0, 1e-6);
  }
}

TEST_F(PipelineTest, RefusesExistingOutput) {
  pipeline::process(options(), config());
  EXPECT_EQ(code_of([&] { pipeline::process(options(), config()); }), ErrorCode::kOutputExists);
}

TEST_F(PipelineTest, UnreadableInputLeavesNothing) {
  write_text(dir_ / "bad.lsv", "{ this is not a video");
  auto o = options();
  o.video = dir_ / "bad.lsv";
  EXPECT_THROW(pipeline::process(o, config()), Error);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "lec"));
  if (fs::exists(dir_ / "out")) EXPECT_TRUE(fs::is_empty(dir_ / "out"));
  o.video = dir_ / "missing.lsv";
  EXPECT_EQ(code_of([&] { pipeline::process(o, config()); }), ErrorCode::kFileNotFound);
}

TEST_F(PipelineTest, DegradesFailedSegments) {
  const auto report = pipeline::process(options(), config("fail_segments = [1]\n"));
  EXPECT_EQ(report.exit_code(), 2);
  ASSERT_EQ(report.failures.size(), 1u);
  EXPECT_EQ(report.failures[0].segment_index, 1u);
  EXPECT_EQ(report.failures[0].stage, "summarization");
  const auto m = catalog::load_manifest(report.manifest_dir);
  EXPECT_EQ(m.segments[1].status, "degraded");
  EXPECT_FALSE(m.segments[1].summary_text);
  EXPECT_FALSE(m.segments[1].summary_clip);
  EXPECT_TRUE(m.segments[1].error);
  EXPECT_TRUE(m.segments[0].summary_clip);
  EXPECT_TRUE(m.segments[2].summary_clip);
  // Ratio covers the summarized segments only: (20 + 24) / 40.
  ASSERT_TRUE(report.compression_ratio());
  EXPECT_NEAR(*report.compression_ratio(), 44.0 / 40.0, 0.01);
}

TEST_F(PipelineTest, AllSegmentsFailing) {
  const auto report = pipeline::process(options(), config("mode = \"fail\"\n"));
  EXPECT_EQ(report.exit_code(), 1);
  EXPECT_EQ(report.failures.size(), 3u);
  EXPECT_FALSE(report.compression_ratio());
  const auto m = catalog::load_manifest(report.manifest_dir);
  for (const auto& s : m.segments) EXPECT_EQ(s.status, "degraded");
}

TEST_F(PipelineTest, InspectMatchesReport) {
  const auto report = pipeline::process(options(), config());
  const auto ins = pipeline::inspect(report.manifest_dir);
  ASSERT_EQ(ins.rows.size(), 3u);
  EXPECT_EQ(ins.compression_ratio, report.compression_ratio());
  const std::string table = pipeline::render_table(ins);
  EXPECT_EQ(table.rfind("index", 0), 0u);
  EXPECT_NE(table.find("ratio "), std::string::npos);
  const auto j = pipeline::to_json(ins);
  ASSERT_EQ(j["segments"].size(), 3u);
  EXPECT_EQ(j["segments"][2]["budget"]["N"], 60);

  write_text(report.manifest_dir / "manifest.json", "{}");
  EXPECT_EQ(code_of([&] { pipeline::inspect(report.manifest_dir); }),
            ErrorCode::kCorruptManifest);
}

TEST(DefaultVideoId, Sanitizes) {
  EXPECT_EQ(pipeline::default_video_id("/x/My Lecture (1).mp4"), "My_Lecture__1_");
  EXPECT_EQ(pipeline::default_video_id("/x/plain.lsv"), "plain");
}

TEST(Cli, ServeStartsOnEmptyRoot) {
  TempDir root;
  const std::string cmd = "timeout 3 '" + kCliTool.string() + "' serve --root '" +
                          root.path().string() + "' --port 0 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  char line[256] = {};
  const bool got = std::fgets(line, sizeof line, pipe) != nullptr;
  pclose(pipe);
  ASSERT_TRUE(got);
  EXPECT_EQ(std::string(line).rfind("listening on port ", 0), 0u);
}

TEST(Cli, ProcessAndInspect) {
  TempDir dir;
  write_text(dir / "c.toml", synth_pipeline_toml());
  const std::string base = "'" + kCliTool.string() + "' ";
  const std::string process = base + "process '" + kLecture.string() + "' --config '" +
                              (dir / "c.toml").string() + "' --out '" + (dir / "out").string() +
                              "' --json > '" + (dir / "r.json").string() + "' 2>/dev/null";
  EXPECT_EQ(std::system(process.c_str()), 0);
  const auto report = nlohmann::json::parse(read_text(dir / "r.json"));
  EXPECT_EQ(report["segments"].size(), 3u);
  EXPECT_NE(std::system((base + "inspect '" + (dir / "out" / "lecture60").string() +
                         "' > /dev/null").c_str()),
            -1);
  EXPECT_EQ(WEXITSTATUS(std::system((base + "inspect '" + (dir / "nope").string() +
                                     "' > /dev/null 2>&1").c_str())),
            1);
}

}  // namespace
}  // namespace lecsum
