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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>

#include "crashsim/blockdev/io.hpp"
#include "crashsim/util/hash.hpp"

namespace crashsim::blockdev {

using Block = std::array<std::uint8_t, kBlockSize>;
using BlockMap = std::map<std::uint64_t, std::shared_ptr<const Block>>;

// Immutable point-in-time contents of a device. Blocks that were never
// written are implicitly zero; written blocks are shared between images.
class DiskImage {
 public:
  explicit DiskImage(std::uint64_t size_bytes);
  DiskImage(std::uint64_t size_bytes, std::shared_ptr<const BlockMap> blocks);

  std::uint64_t size_bytes() const { return size_; }
  std::uint64_t block_count() const { return size_ / kBlockSize; }

  const Block& block(std::uint64_t index) const;
  void read(std::uint64_t offset, std::span<std::uint8_t> out) const;

  // Number of materialized (written) blocks.
  std::size_t stored_blocks() const { return blocks_->size(); }
  const BlockMap& stored() const { return *blocks_; }

  // Content digest over the full logical byte range.
  Digest digest() const;

  // Content equality; representation independent.
  bool operator==(const DiskImage& other) const;

  static const Block& zero_block();

 private:
  std::uint64_t size_;
  std::shared_ptr<const BlockMap> blocks_;
};

void check_device_size(std::uint64_t size_bytes);

// Mutable copy-on-write view over a base image. Shared by the logging device
// and the replay/crash-state builders.
class ImageWriter {
 public:
  explicit ImageWriter(DiskImage base);

  std::uint64_t size_bytes() const { return base_.size_bytes(); }
  void write(std::uint64_t offset, std::span<const std::uint8_t> bytes);
  void read(std::uint64_t offset, std::span<std::uint8_t> out) const;
  const Block& block(std::uint64_t index) const;

  DiskImage snapshot() const;
  void reset_to(DiskImage base);
  std::size_t dirty_blocks() const { return dirty_.size(); }

 private:
  Block& mutable_block(std::uint64_t index);

  DiskImage base_;
  std::map<std::uint64_t, std::shared_ptr<Block>> dirty_;
};

}  // namespace crashsim::blockdev
