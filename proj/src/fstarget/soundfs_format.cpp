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

#include "crashsim/fstarget/soundfs_format.hpp"

#include <zlib.h>

#include <cstring>
#include <set>

namespace crashsim::fs::soundfs {
namespace {

using blockdev::kBlockSize;

void put16(std::uint8_t* p, std::uint16_t v) { std::memcpy(p, &v, 2); }
void put32(std::uint8_t* p, std::uint32_t v) { std::memcpy(p, &v, 4); }
void put64(std::uint8_t* p, std::uint64_t v) { std::memcpy(p, &v, 8); }
std::uint16_t get16(const std::uint8_t* p) { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
std::uint32_t get32(const std::uint8_t* p) { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
std::uint64_t get64(const std::uint8_t* p) { std::uint64_t v; std::memcpy(&v, p, 8); return v; }

std::uint32_t crc(const std::uint8_t* data, std::size_t n, std::uint32_t seed = 0) {
  return static_cast<std::uint32_t>(::crc32(seed, data, static_cast<uInt>(n)));
}

constexpr std::size_t kSbCrcOffset = 52;

struct Extent {
  std::uint32_t lblk, pblk;
  std::uint16_t len;
  bool unwritten;
};

std::vector<Extent> to_extents(const std::map<std::uint32_t, Mapping>& blocks) {
  std::vector<Extent> out;
  for (const auto& [lblk, m] : blocks) {
    if (!out.empty()) {
      auto& e = out.back();
      if (e.lblk + e.len == lblk && e.pblk + e.len == m.pblk && e.unwritten == m.unwritten &&
          e.len < 0xFFFF) {
        ++e.len;
        continue;
      }
    }
    out.push_back({lblk, m.pblk, 1, m.unwritten});
  }
  return out;
}

bool valid_name(std::string_view name) {
  return !name.empty() && name.size() <= kMaxNameLen && name != "." && name != ".." &&
         name.find('/') == std::string_view::npos && name.find('\0') == std::string_view::npos;
}

}  // namespace

MetaState MetaState::empty_root() {
  MetaState s;
  Inode root;
  root.kind = EntryKind::dir;
  root.nlink = 2;
  s.inodes[kRootIno] = root;
  s.dirs[kRootIno] = {};
  return s;
}

Block encode_superblock(const Superblock& sb) {
  Block b{};
  put32(&b[0], kMagic);
  put32(&b[4], kFormatVersion);
  put64(&b[8], sb.block_count);
  put32(&b[16], kInodeStart);
  put32(&b[20], kInodeBlocks);
  put32(&b[24], kDirentStart);
  put32(&b[28], kDirentBlocks);
  put32(&b[32], kJournalStart);
  put32(&b[36], kJournalBlocks);
  put32(&b[40], kDataStart);
  put64(&b[44], sb.journal_seq);
  put32(&b[kSbCrcOffset], crc(b.data(), kSbCrcOffset));
  return b;
}

std::variant<Superblock, std::string> decode_superblock(const Block& b) {
  if (get32(&b[0]) != kMagic) return std::string("bad superblock magic");
  if (get32(&b[4]) != kFormatVersion) return std::string("unsupported format version");
  if (get32(&b[kSbCrcOffset]) != crc(b.data(), kSbCrcOffset)) {
    return std::string("superblock checksum mismatch");
  }
  if (get32(&b[16]) != kInodeStart || get32(&b[20]) != kInodeBlocks ||
      get32(&b[24]) != kDirentStart || get32(&b[28]) != kDirentBlocks ||
      get32(&b[32]) != kJournalStart || get32(&b[36]) != kJournalBlocks ||
      get32(&b[40]) != kDataStart) {
    return std::string("unexpected layout in superblock");
  }
  Superblock sb;
  sb.block_count = get64(&b[8]);
  sb.journal_seq = get64(&b[44]);
  return sb;
}

std::vector<bool> used_blocks(const MetaState& state, std::uint64_t device_blocks) {
  std::vector<bool> used(device_blocks, false);
  for (std::uint64_t i = 0; i < kDataStart && i < device_blocks; ++i) used[i] = true;
  for (const auto& [ino, inode] : state.inodes) {
    for (const auto& [lblk, m] : inode.blocks) {
      if (m.pblk < device_blocks) used[m.pblk] = true;
    }
  }
  return used;
}

std::vector<Block> encode_meta(const MetaState& state, std::uint64_t device_blocks) {
  std::vector<Block> out(kJournalStart - 1, Block{});
  Block& bitmap = out[kBitmapBlock - 1];
  auto used = used_blocks(state, device_blocks);
  for (std::uint64_t i = 0; i < used.size() && i < kBlockSize * 8; ++i) {
    if (used[i]) bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }

  for (const auto& [ino, inode] : state.inodes) {
    if (ino == 0 || ino >= kInodeCount) throw std::length_error("inode number out of range");
    Block& blk = out[kInodeStart + ino / kInodesPerBlock - 1];
    std::uint8_t* p = &blk[(ino % kInodesPerBlock) * kInodeSize];
    auto extents = to_extents(inode.blocks);
    if (extents.size() > kMaxExtents) throw std::length_error("too many extents");
    std::vector<std::uint8_t> inl(inode.symlink_target.begin(), inode.symlink_target.end());
    inl.push_back(static_cast<std::uint8_t>(inode.xattrs.size()));
    for (const auto& [k, v] : inode.xattrs) {
      if (k.size() > 255 || v.size() > 255) throw std::length_error("xattr too large");
      inl.push_back(static_cast<std::uint8_t>(k.size()));
      inl.push_back(static_cast<std::uint8_t>(v.size()));
      inl.insert(inl.end(), k.begin(), k.end());
      inl.insert(inl.end(), v.begin(), v.end());
    }
    if (inl.size() > kInlineSize) throw std::length_error("inline area overflow");
    p[0] = 1;
    p[1] = static_cast<std::uint8_t>(inode.kind);
    put16(p + 2, static_cast<std::uint16_t>(inode.nlink));
    put64(p + 4, inode.size);
    put16(p + 12, static_cast<std::uint16_t>(extents.size()));
    put16(p + 14, static_cast<std::uint16_t>(inl.size()));
    put16(p + 16, static_cast<std::uint16_t>(inode.symlink_target.size()));
    for (std::size_t i = 0; i < extents.size(); ++i) {
      std::uint8_t* e = p + 32 + i * 12;
      put32(e, extents[i].lblk);
      put32(e + 4, extents[i].pblk);
      put16(e + 8, extents[i].len);
      put16(e + 10, extents[i].unwritten ? 1 : 0);
    }
    std::memcpy(p + kInlineOffset, inl.data(), inl.size());
  }

  std::size_t slot = 0;
  for (const auto& [parent, entries] : state.dirs) {
    for (const auto& [name, ino] : entries) {
      if (slot >= kDirentCount) throw std::length_error("dirent table full");
      if (name.size() > kMaxNameLen) throw std::length_error("name too long");
      Block& blk = out[kDirentStart + slot / kDirentsPerBlock - 1];
      std::uint8_t* p = &blk[(slot % kDirentsPerBlock) * kDirentSize];
      put32(p, parent);
      put32(p + 4, ino);
      p[8] = static_cast<std::uint8_t>(name.size());
      std::memcpy(p + 9, name.data(), name.size());
      ++slot;
    }
  }
  return out;
}

std::variant<MetaState, std::string> decode_meta(const std::vector<const Block*>& blocks,
                                                 std::uint64_t device_blocks) {
  if (blocks.size() != kJournalStart - 1) return std::string("wrong metadata block count");
  auto at = [&](std::uint32_t home) -> const Block& { return *blocks[home - 1]; };
  MetaState s;
  for (std::uint32_t ino = 1; ino < kInodeCount; ++ino) {
    const std::uint8_t* p = &at(kInodeStart + ino / kInodesPerBlock)[(ino % kInodesPerBlock) * kInodeSize];
    if (p[0] == 0) continue;
    if (p[0] != 1) return "inode " + std::to_string(ino) + " has bad in-use flag";
    if (p[1] > 2) return "inode " + std::to_string(ino) + " has bad kind";
    Inode inode;
    inode.kind = static_cast<EntryKind>(p[1]);
    inode.nlink = get16(p + 2);
    inode.size = get64(p + 4);
    std::uint16_t next = get16(p + 12);
    std::uint16_t inl_len = get16(p + 14);
    std::uint16_t sym_len = get16(p + 16);
    if (next > kMaxExtents || inl_len == 0 || inl_len > kInlineSize || sym_len + 1u > inl_len) {
      return "inode " + std::to_string(ino) + " has corrupt header";
    }
    for (std::uint16_t i = 0; i < next; ++i) {
      const std::uint8_t* e = p + 32 + i * 12;
      std::uint32_t lblk = get32(e), pblk = get32(e + 4);
      std::uint16_t len = get16(e + 8);
      if (len == 0 || pblk < kDataStart || pblk + std::uint64_t{len} > device_blocks) {
        return "inode " + std::to_string(ino) + " has extent outside the data region";
      }
      for (std::uint16_t k = 0; k < len; ++k) {
        if (!inode.blocks.emplace(lblk + k, Mapping{pblk + k, (get16(e + 10) & 1) != 0}).second) {
          return "inode " + std::to_string(ino) + " has overlapping extents";
        }
      }
    }
    const std::uint8_t* inl = p + kInlineOffset;
    inode.symlink_target.assign(reinterpret_cast<const char*>(inl), sym_len);
    std::size_t pos = sym_len;
    std::uint8_t nx = inl[pos++];
    for (std::uint8_t i = 0; i < nx; ++i) {
      if (pos + 2 > inl_len) return "inode " + std::to_string(ino) + " has corrupt xattrs";
      std::uint8_t kl = inl[pos], vl = inl[pos + 1];
      pos += 2;
      if (pos + kl + vl > inl_len) return "inode " + std::to_string(ino) + " has corrupt xattrs";
      inode.xattrs.emplace(std::string(reinterpret_cast<const char*>(inl + pos), kl),
                           std::string(reinterpret_cast<const char*>(inl + pos + kl), vl));
      pos += kl + vl;
    }
    if (inode.kind == EntryKind::dir) s.dirs[ino];
    s.inodes.emplace(ino, std::move(inode));
  }
  auto root = s.inodes.find(kRootIno);
  if (root == s.inodes.end() || root->second.kind != EntryKind::dir) {
    return std::string("root inode missing");
  }

  for (std::uint32_t slot = 0; slot < kDirentCount; ++slot) {
    const std::uint8_t* p = &at(kDirentStart + slot / kDirentsPerBlock)[(slot % kDirentsPerBlock) * kDirentSize];
    std::uint32_t parent = get32(p);
    if (parent == 0) break;
    std::uint32_t ino = get32(p + 4);
    std::uint8_t len = p[8];
    if (len > kMaxNameLen) return "dirent " + std::to_string(slot) + " has bad name length";
    std::string name(reinterpret_cast<const char*>(p + 9), len);
    if (!valid_name(name)) return "dirent " + std::to_string(slot) + " has invalid name";
    auto dir = s.dirs.find(parent);
    if (dir == s.dirs.end()) return "dirent " + std::to_string(slot) + " has non-directory parent";
    if (!s.inodes.count(ino)) return "dirent '" + name + "' points to a free inode";
    if (!dir->second.emplace(name, ino).second) return "duplicate dirent '" + name + "'";
  }
  return s;
}

std::size_t transaction_blocks(std::size_t copies) { return copies + 2; }

std::vector<Block> encode_transaction(const Transaction& txn) {
  std::vector<Block> out(transaction_blocks(txn.copies.size()), Block{});
  Block& desc = out.front();
  put32(&desc[0], kDescMagic);
  put64(&desc[4], txn.seq);
  put32(&desc[12], static_cast<std::uint32_t>(txn.homes.size()));
  put32(&desc[16], static_cast<std::uint32_t>(txn.intents.size()));
  std::size_t pos = 20;
  for (auto h : txn.homes) {
    put32(&desc[pos], h);
    pos += 4;
  }
  for (const auto& in : txn.intents) {
    if (pos + 9 + in.name.size() > kBlockSize) throw std::length_error("descriptor overflow");
    put32(&desc[pos], in.parent);
    put32(&desc[pos + 4], in.ino);
    desc[pos + 8] = static_cast<std::uint8_t>(in.name.size());
    std::memcpy(&desc[pos + 9], in.name.data(), in.name.size());
    pos += 9 + in.name.size();
  }
  std::uint32_t c = crc(desc.data(), kBlockSize);
  for (std::size_t i = 0; i < txn.copies.size(); ++i) {
    out[1 + i] = txn.copies[i];
    c = crc(out[1 + i].data(), kBlockSize, c);
  }
  Block& commit = out.back();
  put32(&commit[0], kCommitMagic);
  put64(&commit[4], txn.seq);
  put32(&commit[12], static_cast<std::uint32_t>(txn.copies.size()));
  put32(&commit[16], c);
  return out;
}

std::vector<Transaction> scan_journal(const BlockReader& read, std::uint64_t first_seq) {
  std::vector<Transaction> out;
  std::uint32_t pos = 0;
  std::uint64_t seq = first_seq;
  while (pos + 2 <= kJournalBlocks) {
    const Block& desc = read(kJournalStart + pos);
    if (get32(&desc[0]) != kDescMagic || get64(&desc[4]) != seq) break;
    std::uint32_t count = get32(&desc[12]);
    std::uint32_t nintents = get32(&desc[16]);
    if (count > kJournalBlocks - pos - 2 || 20 + std::size_t{count} * 4 > kBlockSize) break;
    const Block& commit = read(kJournalStart + pos + 1 + count);
    if (get32(&commit[0]) != kCommitMagic || get64(&commit[4]) != seq ||
        get32(&commit[12]) != count) {
      break;
    }
    std::uint32_t c = crc(desc.data(), kBlockSize);
    Transaction txn;
    txn.seq = seq;
    for (std::uint32_t i = 0; i < count; ++i) {
      const Block& copy = read(kJournalStart + pos + 1 + i);
      c = crc(copy.data(), kBlockSize, c);
      txn.copies.push_back(copy);
      txn.homes.push_back(get32(&desc[20 + i * 4]));
    }
    if (c != get32(&commit[16])) break;
    std::size_t p = 20 + std::size_t{count} * 4;
    bool ok = true;
    for (std::uint32_t i = 0; i < nintents && ok; ++i) {
      if (p + 9 > kBlockSize) { ok = false; break; }
      IntentRecord in;
      in.parent = get32(&desc[p]);
      in.ino = get32(&desc[p + 4]);
      std::uint8_t len = desc[p + 8];
      if (p + 9 + len > kBlockSize) { ok = false; break; }
      in.name.assign(reinterpret_cast<const char*>(&desc[p + 9]), len);
      txn.intents.push_back(std::move(in));
      p += 9 + len;
    }
    bool homes_ok = true;
    for (auto h : txn.homes) homes_ok = homes_ok && h >= 1 && h < kJournalStart;
    if (!ok || !homes_ok) break;
    out.push_back(std::move(txn));
    pos += count + 2;
    ++seq;
  }
  return out;
}

}  // namespace crashsim::fs::soundfs
