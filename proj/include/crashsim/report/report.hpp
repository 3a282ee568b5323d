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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashsim/harness/harness.hpp"

namespace crashsim::report {

inline constexpr int kSchemaVersion = 1;

enum class Consequence {
  unmountable,
  spurious_entry,
  file_missing,
  data_mismatch,
  metadata_mismatch,
  unwritable_dir,
};

// Ordered by dominance: a smaller value wins when several apply.
struct ConsequenceClass {
  Consequence kind = Consequence::unmountable;
  std::string detail;  // metadata_mismatch only: size, link_count, block_count or xattr

  std::string to_string() const;  // "file_missing", "metadata_mismatch:size"
  static ConsequenceClass parse(const std::string& text);
  auto operator<=>(const ConsequenceClass&) const = default;
};

// Throws std::invalid_argument on an empty diff.
ConsequenceClass classify(const std::vector<harness::DiffEntry>& diff);

struct CampaignMeta {
  int seq = 0;  // 0 for corpus campaigns
  std::string bounds_hash;
  std::uint64_t seed = 0;
};

struct BugReport {
  int schema = kSchemaVersion;
  std::uint64_t index = 0;  // workload index within its sequence length
  std::string workload;     // DSL text
  std::string skeleton;
  std::string descriptor;   // crash point
  ConsequenceClass consequence;
  std::vector<harness::DiffEntry> diff;
  std::string target;
  std::string target_version;
  CampaignMeta meta;
  std::string bug_seed;  // debug builds only; never read by classification

  std::string diff_hash() const;
  nlohmann::json to_json() const;
  static BugReport from_json(const nlohmann::json& j);
};

// The first buggy crash state stands for the workload.
std::optional<BugReport> make_report(std::uint64_t index, const ace::Workload& w,
                                     const std::vector<harness::CrashVerdict>& verdicts,
                                     const fs::FsTarget& target, const CampaignMeta& meta);

struct GroupKey {
  std::string skeleton;
  std::string consequence;
  auto operator<=>(const GroupKey&) const = default;
};

struct Group {
  GroupKey key;
  BugReport representative;  // lowest (seq, index)
  std::size_t size = 0;
  nlohmann::json to_json() const;
};

// Groups come back in key order; input order does not matter.
std::vector<Group> group(const std::vector<BugReport>& reports);
// One group per report, for audits.
std::vector<Group> ungrouped(const std::vector<BugReport>& reports);

std::string groups_hash(const std::vector<Group>& groups);

class KnownBugDb {
 public:
  struct Entry {
    GroupKey key;
    std::string note;
  };

  // A missing file is an empty database.
  static KnownBugDb load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool contains(const GroupKey& key) const;
  // Append-only; returns false when the key is already present.
  bool add(const GroupKey& key, std::string note);
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

struct Suppression {
  std::vector<Group> fresh;
  std::size_t suppressed_groups = 0;
  std::size_t suppressed_reports = 0;
};
Suppression suppress_known(const std::vector<Group>& groups, const KnownBugDb& db);

}  // namespace crashsim::report
