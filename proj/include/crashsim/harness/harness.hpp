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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crashsim/ace/workload.hpp"
#include "crashsim/blockdev/device.hpp"
#include "crashsim/crashgen/crashgen.hpp"
#include "crashsim/fstarget/target.hpp"

namespace crashsim::harness {

inline constexpr std::uint64_t kDeviceSize = blockdev::kDefaultDeviceSize;

// One executed call. Persistence calls carry the checkpoint they produced.
struct TraceEntry {
  fs::FsOp op;
  bool prologue = false;
  fs::FsError result = fs::FsError::ok;
  std::optional<std::uint32_t> checkpoint_id;
};

// What the checker may verify about one path after a crash.
struct Persisted {
  bool name = false;     // the entry exists with this kind
  bool data = false;     // size and contents, if the entry exists
  bool meta = false;     // link count, block count and xattrs, if it exists
  bool listing = false;  // directory: no entries beyond the oracle's

  bool any() const { return name || data || meta || listing; }
  bool operator==(const Persisted&) const = default;
};
using PersistedSet = std::map<std::string, Persisted>;

// Namespace facts accumulated over every state the workload passed through.
struct History {
  std::set<std::string> paths;                              // ever present
  std::set<std::pair<std::string, std::string>> aliases;    // ever co-linked (ordered pair)
};

struct Profile {
  ace::Workload workload;
  std::string target;
  blockdev::DiskImage base_image{kDeviceSize};
  blockdev::IoLog io_log;
  std::vector<TraceEntry> trace;
  std::vector<blockdev::DiskImage> oracles;  // index = checkpoint id - 1
  std::vector<PersistedSet> persisted;       // index = checkpoint id - 1
  History history;
  std::optional<std::string> error;          // an op failed; nothing is checked

  std::uint32_t checkpoint_count() const { return static_cast<std::uint32_t>(oracles.size()); }
};

// mkfs output for a target, computed once per process.
const blockdev::DiskImage& fresh_image(const fs::FsTarget& target);

// Seed for the data pattern of the op at position `index` (prologue first).
inline std::uint32_t op_seed(std::size_t index) { return static_cast<std::uint32_t>(index + 1); }

Profile profile(const ace::Workload& w, const fs::FsTarget& target);

// Reference strategy: re-executes the workload from scratch up to each
// checkpoint and unmounts cleanly there.
std::vector<blockdev::DiskImage> oracles_by_restart(const ace::Workload& w, const fs::FsTarget& target);

// Persisted-set update rules, exposed for tests.
void apply_modification(PersistedSet& set, const fs::FsOp& op, const fs::FsStateView& before,
                        const fs::FsStateView& after);
void apply_persistence(PersistedSet& set, const fs::FsOp& op, const fs::FsStateView& now,
                       const fs::PersistenceGuaranteeSpec& spec);

enum class DiffKind {
  unmountable,
  spurious,
  missing,
  data,
  size,
  link_count,
  block_count,
  xattr,
  unwritable,
};
std::string_view diff_kind_name(DiffKind k);
std::optional<DiffKind> diff_kind_from_name(std::string_view name);

struct DiffEntry {
  DiffKind kind = DiffKind::missing;
  std::string path;
  std::string expected;
  std::string actual;
  bool operator==(const DiffEntry&) const = default;
};

enum class Outcome { pass, bug, harness_error };
std::string_view outcome_name(Outcome o);

struct Verdict {
  Outcome outcome = Outcome::pass;
  std::vector<DiffEntry> diff;  // sorted; empty on pass
  std::string reason;           // harness_error only
  std::optional<fs::FsckReport> fsck;
  bool operator==(const Verdict& o) const {
    return outcome == o.outcome && diff == o.diff && reason == o.reason;
  }
};

// Read checks of one recovered view against one oracle view.
std::vector<DiffEntry> compare_views(const fs::FsStateView& crash, const fs::FsStateView& oracle,
                                     const PersistedSet& persisted, const History& history);

// Mounts `crash_image` (running recovery), then performs read and write checks.
Verdict check(const blockdev::DiskImage& crash_image, const blockdev::DiskImage& oracle,
              const PersistedSet& persisted, const History& history, const fs::FsTarget& target);

struct RunOptions {
  bool all_checkpoints = false;
  bool subset = false;
  crashgen::Granularity granularity = crashgen::Granularity::op;
  std::uint64_t seed = 0;
  std::size_t exhaustive_limit = 12;  // units; larger epochs are sampled
  std::size_t sample_count = 64;
};

struct CrashVerdict {
  std::string descriptor;  // "cp=<k>" or "cp=<k>;prefix=..;kept=..;gran=.."
  Verdict verdict;
};

std::vector<CrashVerdict> run_workload(const ace::Workload& w, const fs::FsTarget& target,
                                       const RunOptions& options = {});

// Re-checks one crash point named by a descriptor from run_workload.
CrashVerdict replay_crash(const ace::Workload& w, const fs::FsTarget& target, const std::string& descriptor);

std::string format_verdict(const Verdict& v);

}  // namespace crashsim::harness
