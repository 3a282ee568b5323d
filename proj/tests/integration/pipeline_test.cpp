// Copyright 2026 The crashsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "crashsim/cli/campaign.hpp"

namespace crashsim {
namespace {

using fs::FsOpKind;

TEST(Pipeline, ReorderedDataBugIsFoundGroupedAndReplayed) {
  cli::CampaignConfig cfg;
  cfg.fs = "bugfs-b5";
  cfg.seq = 2;
  cfg.ops = {FsOpKind::write, FsOpKind::rename};
  cfg.slice = 4000;
  auto r = cli::run_campaign(cfg);
  ASSERT_FALSE(r.groups.empty());
  EXPECT_EQ(r.levels[0].bugs, 0u);
  for (const auto& g : r.groups) {
    EXPECT_EQ(g.key.consequence, "data_mismatch");
    EXPECT_NE(g.key.skeleton.find("rename"), std::string::npos);
    auto res = cli::replay_report(g.representative);
    EXPECT_TRUE(res.reproduced) << g.representative.workload;
  }
}

TEST(Pipeline, SoundFsSurvivesSubsetCrashes) {
  for (auto gran : {crashgen::Granularity::op, crashgen::Granularity::sector}) {
    cli::CampaignConfig cfg;
    cfg.seq = 1;
    cfg.slice = 120;
    cfg.run.subset = true;
    cfg.run.all_checkpoints = true;
    cfg.run.granularity = gran;
    auto r = cli::run_campaign(cfg);
    EXPECT_TRUE(r.reports.empty()) << (r.reports.empty() ? "" : r.reports[0].to_json().dump(2));
    EXPECT_TRUE(r.failures.empty());
    EXPECT_EQ(r.levels[0].workloads, 120u);
  }
}

TEST(Pipeline, SubsetModeExposesTornEpochs) {
  // A seeded variant that is clean at checkpoints may still fail in between.
  auto w = ace::parse("creat foo\nlink foo bar\nsync\nunlink bar\ncreat bar\nfsync bar\n");
  harness::RunOptions opt;
  opt.subset = true;
  auto vs = harness::run_workload(w, fs::find_target("bugfs-b6"), opt);
  std::size_t subset_bugs = 0;
  for (const auto& cv : vs) {
    if (cv.descriptor.find("prefix=") != std::string::npos && cv.verdict.outcome == harness::Outcome::bug) ++subset_bugs;
  }
  EXPECT_GT(vs.size(), 1u);
  EXPECT_GT(subset_bugs, 0u);
}

}  // namespace
}  // namespace crashsim
