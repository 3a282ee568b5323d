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
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "crashsim/blockdev/device.hpp"

namespace crashsim::crashgen {

using blockdev::DiskImage;
using blockdev::Epoch;
using blockdev::IoLog;

enum class Granularity { op, sector };

std::string to_string(Granularity g);
Granularity parse_granularity(const std::string& text);

// Identifies one subset-mode crash state: all of epochs [0, prefix_count)
// plus the kept units of epoch prefix_count, in issue order.
struct SubsetDescriptor {
  std::size_t prefix_count = 0;
  std::vector<std::size_t> kept;
  Granularity granularity = Granularity::op;

  // prefix=<k>;kept=<i1,i2,...>;gran=<op|sector>
  std::string to_string() const;
  static SubsetDescriptor parse(const std::string& text);

  bool operator==(const SubsetDescriptor&) const = default;
};

struct CrashState {
  DiskImage image;
  std::uint32_t checkpoint_id = 0;  // 0: before any persistence point
  std::optional<SubsetDescriptor> subset;
};

struct CheckpointStates {
  std::vector<CrashState> states;
  std::optional<std::string> warning;  // set when the log has no checkpoint
};

// One state per checkpoint id, in id order.
CheckpointStates crash_states_at_checkpoints(const DiskImage& base, const IoLog& log);

// Smallest piece of a target epoch that can independently reach the media.
// Sector granularity splits plain writes into 512-byte pieces; a FUA
// terminator always stays whole.
struct Unit {
  std::size_t element = 0;  // index into records; records.size() is the terminator
  std::uint64_t offset = 0;  // device byte offset
  std::uint64_t byte_begin = 0;  // offset into the record payload
  std::uint64_t length = 0;
};

std::vector<Unit> epoch_units(const Epoch& epoch, Granularity g);

struct SubsetSelector {
  enum class Mode { exhaustive, random };
  Mode mode = Mode::exhaustive;
  std::uint64_t seed = 0;
  std::size_t count = 0;  // random mode only
  Granularity granularity = Granularity::op;
  // Sector mode only: each record keeps a prefix of its sectors.
  bool contiguous_prefix = false;
};

// Lazily yields kept-index lists (ascending) over the units of one epoch.
class SubsetEnumerator {
 public:
  SubsetEnumerator(const std::vector<Epoch>& epochs, std::size_t prefix_count,
                   const SubsetSelector& selector);

  std::size_t unit_count() const { return units_.size(); }
  std::optional<std::vector<std::size_t>> next();

 private:
  std::optional<std::vector<std::size_t>> next_exhaustive();
  std::vector<std::size_t> draw_random();
  std::vector<std::size_t> decode(const std::vector<std::size_t>& digits) const;

  std::vector<Unit> units_;
  SubsetSelector selector_;
  // Per-record sector counts for contiguous-prefix mode; otherwise one digit
  // of radix 2 per unit.
  std::vector<std::size_t> radix_;
  std::vector<std::size_t> digits_;
  bool exhausted_ = false;
  bool random_all_ = false;  // random mode fell back to full enumeration
  std::size_t emitted_ = 0;
  std::mt19937_64 rng_;
  std::set<std::vector<std::size_t>> seen_;
};

// Total number of distinct subsets the selector's unit model admits, capped at
// `cap` to avoid overflow.
std::uint64_t subset_space(const std::vector<Epoch>& epochs, std::size_t prefix_count,
                           const SubsetSelector& selector, std::uint64_t cap);

std::vector<std::vector<std::size_t>> enumerate_target_subsets(
    const std::vector<Epoch>& epochs, std::size_t prefix_count, const SubsetSelector& selector);

// prefix_count may equal epochs.size() only with an empty kept list.
CrashState build_subset_state(const DiskImage& base, const std::vector<Epoch>& epochs,
                              std::size_t prefix_count, const std::vector<std::size_t>& kept,
                              Granularity g);

class CrashgenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crashsim::crashgen
