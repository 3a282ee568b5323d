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

#include "crashsim/blockdev/io.hpp"

#include <algorithm>

namespace crashsim::blockdev {

std::uint8_t IoFlagSet::bits() const {
  return static_cast<std::uint8_t>((write ? 1 : 0) | (flush ? 2 : 0) | (fua ? 4 : 0) |
                                   (checkpoint ? 8 : 0));
}

IoFlagSet IoFlagSet::from_bits(std::uint8_t bits) {
  return IoFlagSet{(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0};
}

std::string to_string(const IoFlagSet& flags) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '|';
    out += name;
  };
  add(flags.write, "WRITE");
  add(flags.flush, "FLUSH");
  add(flags.fua, "FUA");
  add(flags.checkpoint, "CHECKPOINT");
  return out.empty() ? "NONE" : out;
}

Payload make_payload(std::span<const std::uint8_t> bytes) {
  return std::make_shared<const std::vector<std::uint8_t>>(bytes.begin(), bytes.end());
}

bool IoRecord::operator==(const IoRecord& other) const {
  if (seq != other.seq || sector != other.sector || length != other.length ||
      flags != other.flags || checkpoint_id != other.checkpoint_id) {
    return false;
  }
  auto a = bytes();
  auto b = other.bytes();
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

std::uint64_t IoLog::next_seq() const {
  return records_.empty() ? 1 : records_.back().seq + 1;
}

void IoLog::append(IoRecord record) {
  if (!record.flags.any()) throw DeviceError("io record without flags");
  if (record.bytes().size() != record.length) {
    throw DeviceError("io record payload size does not match its length");
  }
  if (!records_.empty() && record.seq <= records_.back().seq) {
    throw DeviceError("io record seq not strictly increasing");
  }
  if (record.flags.checkpoint) {
    if (record.length != 0 || record.flags.write) {
      throw DeviceError("checkpoint record must be empty and not a write");
    }
    if (record.checkpoint_id != checkpoint_count_ + 1) {
      throw DeviceError("checkpoint ids must be consecutive");
    }
    ++checkpoint_count_;
  } else if (record.checkpoint_id.has_value()) {
    throw DeviceError("checkpoint id on a non-checkpoint record");
  }
  records_.push_back(std::move(record));
}

std::optional<std::size_t> IoLog::find_checkpoint(std::uint32_t id) const {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].checkpoint_id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> IoLog::find_seq(std::uint64_t seq) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), seq,
                             [](const IoRecord& r, std::uint64_t s) { return r.seq < s; });
  if (it == records_.end() || it->seq != seq) return std::nullopt;
  return static_cast<std::size_t>(it - records_.begin());
}

bool IoLog::operator==(const IoLog& other) const {
  return checkpoint_count_ == other.checkpoint_count_ && records_ == other.records_;
}

}  // namespace crashsim::blockdev
