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

#include "crashsim/blockdev/disk_image.hpp"

#include <algorithm>
#include <cstring>

namespace crashsim::blockdev {

void check_device_size(std::uint64_t size_bytes) {
  if (size_bytes == 0 || size_bytes % kSectorSize != 0) {
    throw DeviceError("device size must be a positive multiple of the sector size");
  }
  if (size_bytes % kBlockSize != 0) {
    throw DeviceError("device size must be a multiple of the block size");
  }
}

DiskImage::DiskImage(std::uint64_t size_bytes)
    : DiskImage(size_bytes, std::make_shared<const BlockMap>()) {}

DiskImage::DiskImage(std::uint64_t size_bytes, std::shared_ptr<const BlockMap> blocks)
    : size_(size_bytes), blocks_(std::move(blocks)) {
  check_device_size(size_bytes);
}

const Block& DiskImage::zero_block() {
  static const Block kZero{};
  return kZero;
}

const Block& DiskImage::block(std::uint64_t index) const {
  auto it = blocks_->find(index);
  return it == blocks_->end() ? zero_block() : *it->second;
}

void DiskImage::read(std::uint64_t offset, std::span<std::uint8_t> out) const {
  if (offset + out.size() > size_) throw DeviceError("read beyond end of image");
  std::size_t done = 0;
  while (done < out.size()) {
    std::uint64_t pos = offset + done;
    std::uint64_t idx = pos / kBlockSize;
    std::uint64_t within = pos % kBlockSize;
    std::size_t n = std::min<std::uint64_t>(kBlockSize - within, out.size() - done);
    std::memcpy(out.data() + done, block(idx).data() + within, n);
    done += n;
  }
}

Digest DiskImage::digest() const {
  Sha256 h;
  h.update_u64(size_);
  for (std::uint64_t i = 0; i < block_count(); ++i) h.update(block(i));
  return h.finish();
}

bool DiskImage::operator==(const DiskImage& other) const {
  if (size_ != other.size_) return false;
  if (blocks_ == other.blocks_) return true;
  // Only blocks stored on either side can differ from zero.
  auto same = [&](std::uint64_t idx) {
    const Block& a = block(idx);
    const Block& b = other.block(idx);
    return &a == &b || a == b;
  };
  for (const auto& [idx, _] : *blocks_) {
    if (!same(idx)) return false;
  }
  for (const auto& [idx, _] : *other.blocks_) {
    if (!same(idx)) return false;
  }
  return true;
}

ImageWriter::ImageWriter(DiskImage base) : base_(std::move(base)) {}

const Block& ImageWriter::block(std::uint64_t index) const {
  auto it = dirty_.find(index);
  return it == dirty_.end() ? base_.block(index) : *it->second;
}

Block& ImageWriter::mutable_block(std::uint64_t index) {
  auto it = dirty_.find(index);
  if (it == dirty_.end()) {
    auto fresh = std::make_shared<Block>(base_.block(index));
    return *dirty_.emplace(index, std::move(fresh)).first->second;
  }
  if (it->second.use_count() > 1) {
    // Shared with a snapshot; copy before mutating.
    it->second = std::make_shared<Block>(*it->second);
  }
  return *it->second;
}

void ImageWriter::write(std::uint64_t offset, std::span<const std::uint8_t> bytes) {
  if (offset + bytes.size() > size_bytes()) throw DeviceError("write beyond end of device");
  std::size_t done = 0;
  while (done < bytes.size()) {
    std::uint64_t pos = offset + done;
    std::uint64_t idx = pos / kBlockSize;
    std::uint64_t within = pos % kBlockSize;
    std::size_t n = std::min<std::uint64_t>(kBlockSize - within, bytes.size() - done);
    std::memcpy(mutable_block(idx).data() + within, bytes.data() + done, n);
    done += n;
  }
}

void ImageWriter::read(std::uint64_t offset, std::span<std::uint8_t> out) const {
  if (offset + out.size() > size_bytes()) throw DeviceError("read beyond end of device");
  std::size_t done = 0;
  while (done < out.size()) {
    std::uint64_t pos = offset + done;
    std::uint64_t idx = pos / kBlockSize;
    std::uint64_t within = pos % kBlockSize;
    std::size_t n = std::min<std::uint64_t>(kBlockSize - within, out.size() - done);
    std::memcpy(out.data() + done, block(idx).data() + within, n);
    done += n;
  }
}

DiskImage ImageWriter::snapshot() const {
  if (dirty_.empty()) return base_;
  auto merged = std::make_shared<BlockMap>(base_.stored());
  for (const auto& [idx, blk] : dirty_) (*merged)[idx] = blk;
  return DiskImage(base_.size_bytes(), std::move(merged));
}

void ImageWriter::reset_to(DiskImage base) {
  if (base.size_bytes() != base_.size_bytes()) {
    throw DeviceError("reset image size does not match device size");
  }
  base_ = std::move(base);
  dirty_.clear();
}

}  // namespace crashsim::blockdev
