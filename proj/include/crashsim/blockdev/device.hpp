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
#include <span>
#include <variant>
#include <vector>

#include "crashsim/blockdev/disk_image.hpp"
#include "crashsim/blockdev/io.hpp"

namespace crashsim::blockdev {

// Simulated block device. Every write-path request is logged; writes are
// applied eagerly to the current image and durability is reconstructed later
// from the log. Reads are not logged.
class BlockDevice {
 public:
  static BlockDevice create(std::uint64_t size_bytes,
                            std::optional<DiskImage> base = std::nullopt);

  std::uint64_t size_bytes() const { return writer_.size_bytes(); }
  std::uint64_t block_count() const { return size_bytes() / kBlockSize; }

  // Logs the request and applies its payload. Returns the assigned seq.
  std::uint64_t submit_io(IoRequest request);

  std::uint64_t write(std::uint64_t sector, std::span<const std::uint8_t> data,
                      bool fua = false);
  std::uint64_t flush();

  // Appends an empty checkpoint-flagged record; returns its id (1, 2, ...).
  std::uint32_t insert_checkpoint();

  void read(std::uint64_t offset, std::span<std::uint8_t> out) const;
  const Block& read_block(std::uint64_t index) const { return writer_.block(index); }

  DiskImage snapshot() const { return writer_.snapshot(); }

  // Drops every block dirtied since `base` and clears the log.
  void reset_to(DiskImage base);

  const IoLog& log() const { return log_; }
  IoLog take_log();

 private:
  explicit BlockDevice(DiskImage base);

  ImageWriter writer_;
  IoLog log_;
};

using CutPoint = std::variant<CheckpointId, RecordSeq>;

// Applies every write record of `log` up to and including the cut point on top
// of `base`. Seq 0 denotes "before the first record".
DiskImage replay(const DiskImage& base, const IoLog& log, CutPoint until);

// A run of write records terminated by a FLUSH or FUA request.
struct Epoch {
  std::vector<IoRecord> records;
  std::optional<IoRecord> terminator;
};

// Position of a checkpoint among the epochs: it follows `offset` elements
// (records, then the terminator) of epoch `epoch_index`.
struct CheckpointMark {
  std::uint32_t id = 0;
  std::size_t epoch_index = 0;
  std::size_t offset = 0;
};

struct EpochSplit {
  std::vector<Epoch> epochs;
  std::vector<CheckpointMark> checkpoints;
};

EpochSplit split_epochs(const IoLog& log);

}  // namespace crashsim::blockdev
