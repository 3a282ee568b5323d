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

#include "crashsim/blockdev/device.hpp"

#include <string>

namespace crashsim::blockdev {

BlockDevice BlockDevice::create(std::uint64_t size_bytes, std::optional<DiskImage> base) {
  check_device_size(size_bytes);
  if (base.has_value()) {
    if (base->size_bytes() != size_bytes) {
      throw DeviceError("base image size " + std::to_string(base->size_bytes()) +
                        " does not match device size " + std::to_string(size_bytes));
    }
    return BlockDevice(std::move(*base));
  }
  return BlockDevice(DiskImage(size_bytes));
}

BlockDevice::BlockDevice(DiskImage base) : writer_(std::move(base)) {}

std::uint64_t BlockDevice::submit_io(IoRequest request) {
  if (request.flags.checkpoint) {
    throw DeviceError("checkpoint records are inserted via insert_checkpoint");
  }
  if (!request.flags.any()) throw DeviceError("io request without flags");
  if (request.data.size() % kSectorSize != 0) {
    throw DeviceError("io length must be a multiple of the sector size");
  }
  if (!request.data.empty() && !request.flags.write) {
    throw DeviceError("payload on a non-write request");
  }
  if (request.sector * kSectorSize + request.data.size() > size_bytes()) {
    throw DeviceError("io beyond end of device at sector " + std::to_string(request.sector));
  }
  IoRecord record;
  record.seq = log_.next_seq();
  record.sector = request.sector;
  record.length = static_cast<std::uint32_t>(request.data.size());
  record.flags = request.flags;
  if (!request.data.empty()) {
    writer_.write(record.offset(), request.data);
    record.data = std::make_shared<const std::vector<std::uint8_t>>(std::move(request.data));
  }
  log_.append(record);
  return record.seq;
}

std::uint64_t BlockDevice::write(std::uint64_t sector, std::span<const std::uint8_t> data,
                                 bool fua) {
  IoRequest req;
  req.sector = sector;
  req.data.assign(data.begin(), data.end());
  req.flags.write = true;
  req.flags.fua = fua;
  return submit_io(std::move(req));
}

std::uint64_t BlockDevice::flush() {
  IoRequest req;
  req.flags.flush = true;
  return submit_io(std::move(req));
}

std::uint32_t BlockDevice::insert_checkpoint() {
  IoRecord record;
  record.seq = log_.next_seq();
  record.flags.checkpoint = true;
  record.checkpoint_id = log_.checkpoint_count() + 1;
  log_.append(record);
  return *record.checkpoint_id;
}

void BlockDevice::read(std::uint64_t offset, std::span<std::uint8_t> out) const {
  writer_.read(offset, out);
}

void BlockDevice::reset_to(DiskImage base) {
  writer_.reset_to(std::move(base));
  log_ = IoLog{};
}

IoLog BlockDevice::take_log() {
  IoLog out = std::move(log_);
  log_ = IoLog{};
  return out;
}

DiskImage replay(const DiskImage& base, const IoLog& log, CutPoint until) {
  std::size_t end = 0;  // exclusive index
  if (const auto* cp = std::get_if<CheckpointId>(&until)) {
    auto idx = log.find_checkpoint(cp->value);
    if (!idx) throw DeviceError("unknown checkpoint id " + std::to_string(cp->value));
    end = *idx + 1;
  } else {
    auto seq = std::get<RecordSeq>(until).value;
    if (seq != 0) {
      auto idx = log.find_seq(seq);
      if (!idx) throw DeviceError("unknown record seq " + std::to_string(seq));
      end = *idx + 1;
    }
  }
  ImageWriter writer(base);
  const auto& records = log.records();
  for (std::size_t i = 0; i < end; ++i) {
    if (records[i].is_write()) writer.write(records[i].offset(), records[i].bytes());
  }
  return writer.snapshot();
}

EpochSplit split_epochs(const IoLog& log) {
  EpochSplit out;
  Epoch current;
  bool open = false;
  for (const auto& record : log.records()) {
    if (record.flags.checkpoint) {
      std::size_t offset = open ? current.records.size() : 0;
      out.checkpoints.push_back({*record.checkpoint_id, out.epochs.size(), offset});
      continue;
    }
    if (record.flags.terminates_epoch()) {
      current.terminator = record;
      out.epochs.push_back(std::move(current));
      current = Epoch{};
      open = false;
    } else {
      current.records.push_back(record);
      open = true;
    }
  }
  if (open) out.epochs.push_back(std::move(current));
  return out;
}

}  // namespace crashsim::blockdev
