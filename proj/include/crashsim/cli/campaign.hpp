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
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crashsim/ace/generator.hpp"
#include "crashsim/harness/harness.hpp"
#include "crashsim/report/report.hpp"

namespace crashsim::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CampaignConfig {
  std::string fs = "soundfs";
  int seq = 1;                     // levels 1..seq run in order
  std::vector<fs::FsOpKind> ops;   // empty: every core op
  std::optional<std::filesystem::path> corpus;  // replaces generated bounds
  std::size_t workers = 1;
  harness::RunOptions run;
  std::optional<std::filesystem::path> known_bugs;
  bool export_known = false;       // append fresh groups to known_bugs afterwards
  std::optional<std::filesystem::path> out;
  bool no_group = false;
  std::size_t slice = 0;           // >0: this many evenly spread workloads of the last level

  void validate() const;  // throws ConfigError
  ace::Bounds bounds(int level) const;
};

std::vector<fs::FsOpKind> parse_ops(const std::string& list);  // "write,link,..."; throws ConfigError

struct LevelStats {
  int seq = 0;
  std::uint64_t indices = 0;    // size of the index space
  std::uint64_t workloads = 0;  // workloads tested
  std::uint64_t bugs = 0;
  std::uint64_t harness_errors = 0;
  double seconds = 0;
};

struct HarnessFailure {
  int seq = 0;
  std::uint64_t index = 0;
  std::string reason;
};

struct CampaignResult {
  std::vector<LevelStats> levels;
  std::vector<report::BugReport> reports;  // ordered by (seq, index)
  std::vector<HarnessFailure> failures;
  std::vector<report::Group> groups;
  report::Suppression suppression;
  std::uint64_t verdict_fingerprint = 0;  // order-free digest of (seq, index, outcome)
  std::string groups_hash;

  std::map<std::string, std::size_t> class_counts() const;
  std::uint64_t workloads() const;
  int exit_code() const { return suppression.fresh.empty() ? 0 : 1; }
};

// `progress` may be null.
CampaignResult run_campaign(const CampaignConfig& config, std::ostream* progress = nullptr);

// reports.jsonl, groups.jsonl and summary.json under config.out; updates the
// known-bug database when export_known is set.
void write_outputs(const CampaignConfig& config, const CampaignResult& result);
nlohmann::json summary_json(const CampaignConfig& config, const CampaignResult& result);

struct CorpusEntry {
  std::string name;  // file name
  std::optional<ace::Workload> workload;
  std::string error;  // parse error
  std::map<std::string, std::string> expect;  // target -> class
};
// *.wl files in name order. Parse errors are kept per entry.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

struct CorpusRow {
  std::string file;
  std::string expected;  // annotation; "none" on unseeded targets, "-" (anything) on seeded ones
  std::string observed;  // class, "none", "harness_error" or "parse_error"
  std::string detail;
  bool match = false;
};
std::vector<CorpusRow> run_corpus(const std::filesystem::path& dir, const fs::FsTarget& target);
std::string format_corpus_table(const std::vector<CorpusRow>& rows);

struct ReplayResult {
  bool refused = false;
  std::string message;
  harness::CrashVerdict verdict;
  std::string consequence;  // "none" when the crash state passes
  bool reproduced = false;  // same class and diff as the report
};
// `fs_override` names the target to replay on; it must match the report.
ReplayResult replay_report(const report::BugReport& r, const std::optional<std::string>& fs_override = {});
// Reads line `line` (0-based) of a reports or groups file.
report::BugReport read_report(const std::filesystem::path& file, std::size_t line);

}  // namespace crashsim::cli
