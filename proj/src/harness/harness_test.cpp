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

#include "crashsim/harness/harness.hpp"

#include <chrono>
#include <random>

#include <gtest/gtest.h>

#include "crashsim/ace/generator.hpp"

namespace crashsim::harness {
namespace {

using fs::FsOpKind;

const fs::FsTarget& sound() { return fs::find_target("soundfs"); }

std::vector<ace::Workload> seq1() {
  static const std::vector<ace::Workload> ws = [] {
    std::vector<ace::Workload> out;
    ace::Generator gen(ace::Bounds{});
    gen.for_each(0, gen.size(), [&](std::uint64_t, const ace::Workload& w) { out.push_back(w); });
    return out;
  }();
  return ws;
}

bool has_kind(const Verdict& v, DiffKind k) {
  for (const auto& d : v.diff) {
    if (d.kind == k) return true;
  }
  return false;
}

fs::FsStateView view(const blockdev::DiskImage& image, const fs::FsTarget& target = sound()) {
  auto m = target.mount(blockdev::BlockDevice::create(image.size_bytes(), image));
  return std::get<std::unique_ptr<fs::FsHandle>>(m)->state_view();
}

TEST(ProfileTest, ForkOraclesMatchRestartOracles) {
  auto ws = seq1();
  for (std::size_t i = 0; i < ws.size(); i += 5) {
    auto p = profile(ws[i], sound());
    ASSERT_FALSE(p.error) << *p.error;
    auto restart = oracles_by_restart(ws[i], sound());
    ASSERT_EQ(p.oracles.size(), restart.size());
    for (std::size_t k = 0; k < restart.size(); ++k) {
      EXPECT_EQ(view(p.oracles[k]).entries, view(restart[k]).entries) << ace::serialize(ws[i]);
    }
  }
}

TEST(ProfileTest, DeterministicIoLog) {
  auto w = ace::parse("creat foo\nwrite (0-16K) foo\nlink foo bar\nfsync foo\nrename bar baz\nsync\n");
  auto a = profile(w, sound());
  auto b = profile(w, sound());
  EXPECT_EQ(a.io_log, b.io_log);
  EXPECT_EQ(a.checkpoint_count(), 2u);
  ASSERT_EQ(a.trace.size(), 6u);
  EXPECT_EQ(a.trace[3].checkpoint_id, 1u);
  EXPECT_EQ(a.trace[5].checkpoint_id, 2u);
  EXPECT_TRUE(a.history.aliases.count({"foo", "bar"}));
  EXPECT_TRUE(a.history.aliases.count({"foo", "baz"}));
  EXPECT_FALSE(a.history.aliases.count({"bar", "baz"}));
}

TEST(ProfileTest, FailingOpIsAHarnessError) {
  auto w = ace::parse("unlink nothere\nsync\n");
  auto p = profile(w, sound());
  ASSERT_TRUE(p.error);
  auto vs = run_workload(w, sound());
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].verdict.outcome, Outcome::harness_error);
}

TEST(PersistedTest, FsyncCoversHardLinksAndAncestors) {
  auto w = ace::parse("mkdir A\ncreat A/foo\nlink A/foo bar\nfsync A/foo\n");
  auto p = profile(w, sound());
  ASSERT_EQ(p.persisted.size(), 1u);
  const auto& s = p.persisted[0];
  EXPECT_EQ(s.at("A/foo"), (Persisted{true, true, true, false}));
  EXPECT_EQ(s.at("bar"), (Persisted{true, true, true, false}));
  EXPECT_TRUE(s.at("A").name);
  EXPECT_FALSE(s.at("A").listing);
  EXPECT_TRUE(s.at("/").name);
}

TEST(PersistedTest, ModificationsRetractGuarantees) {
  auto w = ace::parse("creat foo\ncreat bar\nsync\nwrite (0-4K) foo\nrename bar baz\nfsync baz\n");
  auto p = profile(w, sound());
  ASSERT_EQ(p.persisted.size(), 2u);
  const auto& s = p.persisted[1];
  EXPECT_FALSE(s.count("bar"));
  EXPECT_EQ(s.at("foo"), (Persisted{true, false, false, false}));
  EXPECT_FALSE(s.at("/").listing);
  EXPECT_TRUE(s.at("baz").data);
}

TEST(PersistedTest, DirFsyncPersistsListing) {
  auto w = ace::parse("mkdir A\ncreat A/foo\nsync\ncreat A/bar\nfsync A\n");
  auto p = profile(w, sound());
  const auto& s = p.persisted[1];
  EXPECT_TRUE(s.at("A").listing);
  EXPECT_TRUE(s.at("A/bar").name);
  EXPECT_FALSE(s.at("A/bar").data);
}

TEST(CompareTest, NoiseOutsidePersistedSetIsIgnored) {
  auto w = ace::parse("creat foo\ncreat bar\nwrite (0-16K) foo\nwrite (0-8K) bar\nfsync foo\n");
  auto p = profile(w, sound());
  auto oracle = view(p.oracles[0]);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto crash = oracle;
    auto& bar = crash.entries.at("bar");
    bar.size = rng() % 20000;
    bar.data_hash[rng() % 32] ^= 1;
    bar.block_count = rng() % 64;
    if (rng() % 2) crash.entries.erase("bar");
    EXPECT_TRUE(compare_views(crash, oracle, p.persisted[0], p.history).empty());
  }
  auto crash = oracle;
  crash.entries.at("foo").data_hash[0] ^= 1;
  auto d = compare_views(crash, oracle, p.persisted[0], p.history);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, DiffKind::data);
  crash.entries.at("foo").size = 4096;
  d = compare_views(crash, oracle, p.persisted[0], p.history);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, DiffKind::size);
}

TEST(CompareTest, SpuriousEntries) {
  auto w = ace::parse("creat foo\ncreat bar\nsync\n");
  auto p = profile(w, sound());
  auto oracle = view(p.oracles[0]);
  auto crash = oracle;
  crash.entries["ghost"] = crash.entries.at("foo");
  auto d = compare_views(crash, oracle, p.persisted[0], p.history);
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].kind, DiffKind::spurious);

  crash = oracle;
  crash.entries.at("bar").ino = crash.entries.at("foo").ino;
  d = compare_views(crash, oracle, p.persisted[0], p.history);
  EXPECT_TRUE(std::any_of(d.begin(), d.end(), [](auto& e) { return e.kind == DiffKind::spurious; }));
}

TEST(CheckTest, FallocBeyondEofLosesBlocks) {
  auto w = ace::parse("creat foo\nwrite (0-16K) foo\nsync\nfalloc -k (16-32K) foo\nfsync foo\n");
  auto vs = run_workload(w, fs::find_target("bugfs-b3"));
  ASSERT_EQ(vs.size(), 1u);
  const auto& v = vs[0].verdict;
  EXPECT_EQ(v.outcome, Outcome::bug);
  ASSERT_TRUE(has_kind(v, DiffKind::block_count)) << format_verdict(v);
  for (const auto& d : v.diff) {
    if (d.kind == DiffKind::block_count) {
      EXPECT_EQ(d.expected, "64 sectors");
      EXPECT_EQ(d.actual, "32 sectors");
    }
  }
  EXPECT_EQ(run_workload(w, sound())[0].verdict.outcome, Outcome::pass);
}

TEST(CheckTest, FigureWorkloadBricksTheImage) {
  auto w = ace::parse("creat foo\nlink foo bar\nsync\nunlink bar\ncreat bar\nfsync bar\n");
  auto vs = run_workload(w, fs::find_target("bugfs-b6"));
  ASSERT_EQ(vs.size(), 1u);
  const auto& v = vs[0].verdict;
  ASSERT_EQ(v.diff.size(), 1u) << format_verdict(v);
  EXPECT_EQ(v.diff[0].kind, DiffKind::unmountable);
  ASSERT_TRUE(v.fsck);
  EXPECT_FALSE(v.fsck->consistent);
  EXPECT_NE(format_verdict(v).find("fsck"), std::string::npos);
  EXPECT_EQ(run_workload(w, sound())[0].verdict.outcome, Outcome::pass);
}

TEST(CheckTest, CleanUnmountIsSoundOnEveryTarget) {
  auto ws = seq1();
  for (const auto& name : fs::target_names()) {
    const auto& target = fs::find_target(name);
    for (std::size_t i = 0; i < ws.size(); i += 37) {
      auto p = profile(ws[i], target);
      ASSERT_FALSE(p.error);
      for (std::size_t k = 0; k < p.oracles.size(); ++k) {
        auto v = check(p.oracles[k], p.oracles[k], p.persisted[k], p.history, target);
        EXPECT_EQ(v.outcome, Outcome::pass) << name << "\n" << ace::serialize(ws[i]) << format_verdict(v);
      }
    }
  }
}

TEST(RunTest, SoundFsPassesEverySeqOneCheckpoint) {
  RunOptions opt;
  opt.all_checkpoints = true;
  std::size_t checked = 0;
  for (const auto& w : seq1()) {
    for (const auto& cv : run_workload(w, sound(), opt)) {
      ++checked;
      EXPECT_EQ(cv.verdict.outcome, Outcome::pass) << ace::serialize(w) << cv.descriptor << "\n"
                                                   << format_verdict(cv.verdict);
    }
  }
  EXPECT_GT(checked, seq1().size());
}

TEST(RunTest, SoundFsPassesSubsetStates) {
  RunOptions opt;
  opt.subset = true;
  auto ws = seq1();
  for (std::size_t i = 0; i < ws.size(); i += 41) {
    for (const auto& cv : run_workload(ws[i], sound(), opt)) {
      EXPECT_EQ(cv.verdict.outcome, Outcome::pass) << ace::serialize(ws[i]) << cv.descriptor << "\n"
                                                   << format_verdict(cv.verdict);
    }
  }
}

TEST(RunTest, ModesControlVerdictCount) {
  auto w = ace::parse("creat foo\nsync\nwrite (0-4K) foo\nfsync foo\ncreat bar\nsync\n");
  EXPECT_EQ(run_workload(w, sound()).size(), 1u);
  RunOptions all;
  all.all_checkpoints = true;
  auto vs = run_workload(w, sound(), all);
  ASSERT_EQ(vs.size(), 3u);
  EXPECT_EQ(vs[0].descriptor, "cp=1");
  EXPECT_EQ(vs[2].descriptor, "cp=3");
  RunOptions sub;
  sub.subset = true;
  EXPECT_GT(run_workload(w, sound(), sub).size(), 1u);
}

TEST(RunTest, ReplayReproducesVerdicts) {
  auto w = ace::parse("creat foo\nwrite (0-16K) foo\nsync\nfalloc -k (16-32K) foo\nfsync foo\n");
  const auto& b3 = fs::find_target("bugfs-b3");
  RunOptions opt;
  opt.subset = true;
  opt.all_checkpoints = true;
  for (const auto& cv : run_workload(w, b3, opt)) {
    EXPECT_EQ(replay_crash(w, b3, cv.descriptor).verdict, cv.verdict) << cv.descriptor;
  }
  EXPECT_EQ(replay_crash(w, b3, "cp=9").verdict.outcome, Outcome::harness_error);
  EXPECT_THROW(replay_crash(w, b3, "bogus"), std::invalid_argument);
}

TEST(RunTest, LatencyPerWorkload) {
  auto ws = seq1();
  auto start = std::chrono::steady_clock::now();
  std::size_t n = 0;
  for (std::size_t i = 0; i < ws.size(); i += 8, ++n) run_workload(ws[i], sound());
  double per = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / n;
  std::cout << "mean latency " << per * 1000 << " ms over " << n << " workloads\n";
  EXPECT_LT(per, 0.05);
}

}  // namespace
}  // namespace crashsim::harness
