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

#include "crashsim/report/report.hpp"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

namespace crashsim::report {
namespace {

using harness::DiffEntry;
using harness::DiffKind;

DiffEntry entry(DiffKind k, std::string path = "foo") { return {k, std::move(path), "e", "a"}; }

TEST(ClassifyTest, Examples) {
  EXPECT_EQ(classify({entry(DiffKind::missing)}).to_string(), "file_missing");
  EXPECT_EQ(classify({{DiffKind::size, "foo", "16384", "0"}}).to_string(), "metadata_mismatch:size");
  EXPECT_EQ(classify({entry(DiffKind::data), entry(DiffKind::unmountable, "/")}).to_string(), "unmountable");
  EXPECT_EQ(classify({entry(DiffKind::unwritable)}).to_string(), "unwritable_dir");
  EXPECT_THROW(classify({}), std::invalid_argument);
}

// Every non-empty combination of diff kinds lands on the highest-ranked class.
TEST(ClassifyTest, DominanceIsTotal) {
  const std::vector<std::pair<DiffKind, std::string>> rank = {
      {DiffKind::unmountable, "unmountable"},
      {DiffKind::spurious, "spurious_entry"},
      {DiffKind::missing, "file_missing"},
      {DiffKind::data, "data_mismatch"},
      {DiffKind::size, "metadata_mismatch:size"},
      {DiffKind::link_count, "metadata_mismatch:link_count"},
      {DiffKind::block_count, "metadata_mismatch:block_count"},
      {DiffKind::xattr, "metadata_mismatch:xattr"},
      {DiffKind::unwritable, "unwritable_dir"},
  };
  for (unsigned mask = 1; mask < (1u << rank.size()); ++mask) {
    std::vector<DiffEntry> diff;
    std::string expected;
    for (std::size_t i = 0; i < rank.size(); ++i) {
      if (!(mask & (1u << i))) continue;
      diff.push_back(entry(rank[i].first));
      if (expected.empty()) expected = rank[i].second;
    }
    std::reverse(diff.begin(), diff.end());
    EXPECT_EQ(classify(diff).to_string(), expected) << mask;
  }
}

TEST(ClassifyTest, ParseRoundTrip) {
  for (auto text : {"unmountable", "spurious_entry", "file_missing", "data_mismatch",
                    "metadata_mismatch:block_count", "unwritable_dir"}) {
    EXPECT_EQ(ConsequenceClass::parse(text).to_string(), text);
  }
  EXPECT_THROW(ConsequenceClass::parse("metadata_mismatch"), std::invalid_argument);
  EXPECT_THROW(ConsequenceClass::parse("file_missing:size"), std::invalid_argument);
  EXPECT_THROW(ConsequenceClass::parse("corruption"), std::invalid_argument);
}

BugReport report(std::uint64_t index, std::string skeleton, DiffKind k, std::string path = "foo") {
  BugReport r;
  r.index = index;
  r.workload = "creat " + path + "\nsync\n---crash---\n";
  r.skeleton = std::move(skeleton);
  r.descriptor = "cp=1";
  r.diff = {entry(k, path)};
  r.consequence = classify(r.diff);
  r.target = "bugfs-b1";
  r.target_version = "1";
  r.meta = {1, "abc", 0};
  return r;
}

TEST(GroupTest, FileVariantsCollapse) {
  std::vector<BugReport> rs;
  std::uint64_t i = 40;
  for (auto path : {"foo", "bar", "A/foo", "A/bar"}) rs.push_back(report(i--, "link", DiffKind::missing, path));
  auto gs = group(rs);
  ASSERT_EQ(gs.size(), 1u);
  EXPECT_EQ(gs[0].size, 4u);
  EXPECT_EQ(gs[0].representative.index, 37u);
  EXPECT_EQ(gs[0].key.consequence, "file_missing");
  EXPECT_EQ(ungrouped(rs).size(), 4u);
}

TEST(GroupTest, EmptyAndSplitByClass) {
  EXPECT_TRUE(group({}).empty());
  auto gs = group({report(1, "link", DiffKind::missing), report(2, "link", DiffKind::spurious)});
  EXPECT_EQ(gs.size(), 2u);
}

TEST(GroupTest, IndependentOfArrivalOrder) {
  std::vector<BugReport> rs;
  for (std::uint64_t i = 0; i < 60; ++i) {
    rs.push_back(report(i, i % 3 ? "link" : "rename", i % 2 ? DiffKind::missing : DiffKind::data));
  }
  auto h = groups_hash(group(rs));
  std::mt19937 rng(3);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(rs.begin(), rs.end(), rng);
    EXPECT_EQ(groups_hash(group(rs)), h);
  }
}

TEST(ReportTest, JsonRoundTrip) {
  auto r = report(9, "link,unlink", DiffKind::block_count);
  r.bug_seed = "B1";
  auto back = BugReport::from_json(nlohmann::json::parse(r.to_json().dump()));
  EXPECT_EQ(back.to_json(), r.to_json());
  EXPECT_EQ(back.diff_hash(), r.diff_hash());
  auto j = r.to_json();
  j["schema"] = 99;
  EXPECT_THROW(BugReport::from_json(j), std::invalid_argument);
}

TEST(ReportTest, MakeReportFromHarness) {
  auto w = ace::parse("creat foo\nwrite (0-16K) foo\nsync\nfalloc -k (16-32K) foo\nfsync foo\n");
  const auto& b3 = fs::find_target("bugfs-b3");
  auto r = make_report(5, w, harness::run_workload(w, b3), b3, {1, "h", 0});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->consequence.to_string(), "metadata_mismatch:block_count");
  EXPECT_EQ(r->skeleton, "creat,write,falloc");
  const auto& sound = fs::find_target("soundfs");
  EXPECT_FALSE(make_report(5, w, harness::run_workload(w, sound), sound, {}));
}

TEST(KnownBugDbTest, SuppressionAndPersistence) {
  std::vector<BugReport> rs = {report(1, "link", DiffKind::missing), report(2, "link", DiffKind::missing),
                               report(3, "rename", DiffKind::spurious)};
  auto gs = group(rs);
  KnownBugDb db;
  auto s = suppress_known(gs, db);
  EXPECT_EQ(s.fresh.size(), gs.size());
  EXPECT_EQ(s.suppressed_reports, 0u);

  EXPECT_TRUE(db.add(gs[0].key, "seen"));
  EXPECT_FALSE(db.add(gs[0].key, "again"));
  s = suppress_known(gs, db);
  ASSERT_EQ(s.fresh.size(), 1u);
  std::size_t total = s.suppressed_reports;
  for (const auto& g : s.fresh) total += g.size;
  EXPECT_EQ(total, rs.size());

  auto path = std::filesystem::temp_directory_path() / "crashsim_known_test.json";
  std::filesystem::remove(path);
  EXPECT_TRUE(KnownBugDb::load(path).entries().empty());
  db.save(path);
  auto loaded = KnownBugDb::load(path);
  ASSERT_EQ(loaded.entries().size(), 1u);
  EXPECT_TRUE(loaded.contains(gs[0].key));
  EXPECT_EQ(loaded.entries()[0].note, "seen");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace crashsim::report
