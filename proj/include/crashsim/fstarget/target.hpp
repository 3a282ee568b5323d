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

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crashsim/blockdev/device.hpp"
#include "crashsim/fstarget/ops.hpp"
#include "crashsim/fstarget/state_view.hpp"

namespace crashsim::fs {

// What a target promises to keep across a crash. The checker derives its
// persisted sets from these flags only.
struct PersistenceGuaranteeSpec {
  bool fsync_file_persists_parent_dirent = true;
  bool fsync_dir_persists_children_entries = true;
  bool fsync_file_persists_all_hard_links = true;
  bool rename_atomic_across_crash = true;
};

// One seeded bug of a buggy variant.
struct BugSeed {
  std::string id;
  std::string description;
  std::vector<FsOpKind> trigger;  // core kinds a workload needs to expose it
  std::string consequence;        // report class name
  std::vector<std::string> mirrors;  // corpus entry names
};

struct Unmountable {
  std::string reason;
};

struct FsckReport {
  bool consistent = true;
  bool repairable = true;
  std::vector<std::string> problems;
};

// A mounted file system instance. Single-threaded; owns its device.
class FsHandle {
 public:
  virtual ~FsHandle() = default;

  // Core ops and persistence ops. `seed` selects the bytes written by data ops.
  virtual FsError apply(const FsOp& op, std::uint32_t seed = 0) = 0;
  virtual FsStateView state_view() const = 0;
  // Completes pending work and returns the resulting device image.
  virtual blockdev::DiskImage unmount_clean() = 0;
  virtual blockdev::BlockDevice& device() = 0;
  // Independent replica with identical in-memory and device state.
  virtual std::unique_ptr<FsHandle> clone() const = 0;
};

using MountResult = std::variant<std::unique_ptr<FsHandle>, Unmountable>;

class FsTarget {
 public:
  virtual ~FsTarget() = default;

  virtual std::string name() const = 0;
  // Bumped whenever on-disk format or behavior changes; replay refuses
  // reports made with a different version.
  virtual std::string version() const = 0;
  virtual PersistenceGuaranteeSpec guarantees() const = 0;
  virtual std::optional<BugSeed> seed() const { return std::nullopt; }

  // Throws blockdev::DeviceError when the device is too small.
  virtual void mkfs(blockdev::BlockDevice& device) const = 0;
  virtual MountResult mount(blockdev::BlockDevice device) const = 0;
  virtual FsckReport fsck(const blockdev::DiskImage& image) const = 0;
};

const FsTarget& find_target(const std::string& name);
std::vector<std::string> target_names();

}  // namespace crashsim::fs
