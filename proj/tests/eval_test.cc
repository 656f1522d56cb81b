// Copyright 2026 The wkws Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wkws/eval.h"

#include <gtest/gtest.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>

#include "testing/oracles.h"
#include "wkws/error.h"
#include "wkws/manifest.h"
#include "wkws/micro_corpus.h"

namespace wkws {
namespace {

namespace fs = std::filesystem;

ClipScore Clip(const std::string& id, int label, std::vector<double> scores) {
  ClipScore c;
  c.record_id = id;
  c.label = label;
  c.scores = std::move(scores);
  return c;
}

TEST(SummarizeTest, AccuracyApAndRoc) {
  std::vector<ClipScore> clips = {
      Clip("a", 0, {0.7, 0.2, 0.1}),
      Clip("b", 1, {0.6, 0.3, 0.1}),
      Clip("c", 1, {0.1, 0.8, 0.1}),
      Clip("d", 0, {0.2, 0.7, 0.1}),
  };
  const EvalReport r = Summarize(clips, 3);
  EXPECT_EQ(r.clips[0].prediction, 0);
  EXPECT_EQ(r.clips[1].prediction, 0);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  ASSERT_EQ(r.per_class_ap.size(), 3u);
  EXPECT_FALSE(r.per_class_ap[2].has_value());
  EXPECT_EQ(r.skipped_classes, std::vector<int>{2});
  // Class 0 scores 0.7, 0.6, 0.1, 0.2 with positives a, d: ranks 1 and 3.
  EXPECT_NEAR(*r.per_class_ap[0], (1.0 + 2.0 / 3.0) / 2, 1e-15);
  EXPECT_NEAR(r.map, (*r.per_class_ap[0] + *r.per_class_ap[1]) / 2, 1e-15);
  ASSERT_TRUE(r.roc[0].has_value());
  EXPECT_NEAR(r.roc[0]->auc,
              testing::PairCountingAuc({0.7, 0.6, 0.1, 0.2}, {true, false, false, true}), 1e-12);
  EXPECT_FALSE(r.roc[2].has_value());
}

TEST(SummarizeTest, JsonRoundTrip) {
  std::vector<ClipScore> clips = {
      Clip("x/1.wav", 0, {0.9, 0.1}),
      Clip("x/2.wav", 1, {0.4, 0.6}),
      Clip("x/3.wav", 1, {0.5, 0.5}),
  };
  const EvalReport r = Summarize(clips, 2);
  const std::string json = ReportToJson(r);
  const EvalReport back = ReportFromJson(json);
  EXPECT_EQ(ReportToJson(back), json);
  EXPECT_EQ(back.clips[1].record_id, "x/2.wav");
  EXPECT_EQ(back.accuracy, r.accuracy);
  EXPECT_EQ(RocToCsv(back), RocToCsv(r));
  EXPECT_EQ(RocToCsv(r).rfind("class,threshold,fpr,tpr\n", 0), 0u);
  EXPECT_THROW(ReportFromJson("{not json"), FormatError);
}

class EvaluateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("wkws_eval_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    MicroCorpusOptions opt;
    opt.clips_per_word = 3;
    WriteMicroCorpus(root_ / "kw", opt);
    SynthConfig s;
    s.target_seconds = 1.0;
    s.keyword_dir = root_ / "kw";
    s.out_dir = root_ / "data";
    BuildDataset(s, ScanKeywordCorpus(s.keyword_dir), {});
    Rng rng(1);
    config_.stem_channels = 4;
    config_.block_channels = {6, 8};
    params_ = InitModel(rng, config_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path root_;
  ModelConfig config_;
  ModelParams params_;
};

TEST_F(EvaluateTest, ScoresEveryTestClip) {
  const DatasetManifest m = ReadManifest(root_ / "data" / "test.jsonl");
  EvalOptions opt;
  opt.base_dir = root_ / "data";
  const EvalReport r = Evaluate(params_, m, opt);
  ASSERT_EQ(r.clips.size(), 12u);
  EXPECT_EQ(r.clips[0].record_id.rfind("audio/test/", 0), 0u) << r.clips[0].record_id;
  for (const auto& c : r.clips) {
    double sum = 0;
    for (double s : c.scores) sum += s;
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  // Batch size and threads do not change any score.
  opt.batch_size = 1;
  opt.jobs = 3;
  const EvalReport r1 = Evaluate(params_, m, opt);
  for (std::size_t i = 0; i < r.clips.size(); ++i) EXPECT_EQ(r.clips[i].scores, r1.clips[i].scores);
}

TEST_F(EvaluateTest, RejectsNonTestRecords) {
  EXPECT_THROW(Evaluate(params_, ReadManifest(root_ / "data" / "train.jsonl")), ValidationError);
}

TEST_F(EvaluateTest, MissingAudioNamesTheRecord) {
  DatasetManifest m = ReadManifest(root_ / "data" / "test.jsonl");
  fs::remove(m.records[2].out_path);
  try {
    Evaluate(params_, m);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace wkws
