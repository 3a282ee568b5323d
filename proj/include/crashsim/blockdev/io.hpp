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
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crashsim::blockdev {

inline constexpr std::uint64_t kSectorSize = 512;
inline constexpr std::uint64_t kBlockSize = 4096;
inline constexpr std::uint64_t kSectorsPerBlock = kBlockSize / kSectorSize;
inline constexpr std::uint64_t kDefaultDeviceSize = 4ull * 1024 * 1024;

class DeviceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IoFlagSet {
  bool write = false;
  bool flush = false;
  bool fua = false;
  bool checkpoint = false;

  // bit0 write, bit1 flush, bit2 fua, bit3 checkpoint
  std::uint8_t bits() const;
  static IoFlagSet from_bits(std::uint8_t bits);

  bool any() const { return write || flush || fua || checkpoint; }
  bool terminates_epoch() const { return flush || fua; }

  bool operator==(const IoFlagSet&) const = default;
};

std::string to_string(const IoFlagSet& flags);

using Payload = std::shared_ptr<const std::vector<std::uint8_t>>;

Payload make_payload(std::span<const std::uint8_t> bytes);

// One logged block-device request.
struct IoRecord {
  std::uint64_t seq = 0;
  std::uint64_t sector = 0;
  std::uint32_t length = 0;
  Payload data;
  IoFlagSet flags;
  std::optional<std::uint32_t> checkpoint_id;

  std::span<const std::uint8_t> bytes() const {
    if (!data) return {};
    return {data->data(), data->size()};
  }
  std::uint64_t offset() const { return sector * kSectorSize; }
  bool is_write() const { return flags.write && length > 0; }

  bool operator==(const IoRecord& other) const;
};

// A request as submitted by the file system, before the device assigns a seq.
struct IoRequest {
  std::uint64_t sector = 0;
  std::vector<std::uint8_t> data;
  IoFlagSet flags;
};

struct CheckpointId {
  std::uint32_t value = 0;
};

struct RecordSeq {
  std::uint64_t value = 0;
};

class IoLog {
 public:
  IoLog() = default;

  const std::vector<IoRecord>& records() const { return records_; }
  std::uint32_t checkpoint_count() const { return checkpoint_count_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  std::uint64_t next_seq() const;

  // Appends a record, enforcing seq monotonicity and checkpoint numbering.
  void append(IoRecord record);

  // Index of the checkpoint record with this id, if present.
  std::optional<std::size_t> find_checkpoint(std::uint32_t id) const;
  std::optional<std::size_t> find_seq(std::uint64_t seq) const;

  bool operator==(const IoLog& other) const;

 private:
  std::vector<IoRecord> records_;
  std::uint32_t checkpoint_count_ = 0;
};

}  // namespace crashsim::blockdev
