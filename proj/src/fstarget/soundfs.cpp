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

#include "crashsim/fstarget/soundfs.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace crashsim::fs::soundfs {

using blockdev::BlockDevice;
using blockdev::DeviceError;
using blockdev::DiskImage;
using blockdev::kBlockSize;
using blockdev::kSectorsPerBlock;

namespace {

constexpr std::uint64_t kMaxDeviceBlocks = kBlockSize * 8;  // one bitmap block
constexpr std::size_t kMaxSymlinkLen = 64;

const Block& zero_block() { return DiskImage::zero_block(); }

std::uint32_t block_of(std::uint64_t offset) {
  return static_cast<std::uint32_t>(offset / kBlockSize);
}

std::uint32_t blocks_covering(std::uint64_t size) {
  return static_cast<std::uint32_t>((size + kBlockSize - 1) / kBlockSize);
}

bool valid_name(std::string_view name) {
  return !name.empty() && name.size() <= kMaxNameLen && name != "." && name != "..";
}

}  // namespace

bool is_global(CommitKind kind) { return kind == CommitKind::sync || kind == CommitKind::unmount; }

SoundFs::SoundFs(BlockDevice device) : dev_(std::move(device)) {}

void SoundFs::format(BlockDevice& device) {
  auto blocks = device.block_count();
  if (blocks < kMinBlocks) {
    throw DeviceError("device too small for soundfs: " + std::to_string(blocks) + " blocks");
  }
  if (blocks > kMaxDeviceBlocks) throw DeviceError("device too large for soundfs");
  auto sb = encode_superblock({blocks, 1});
  device.write(0, sb);
  auto meta = encode_meta(MetaState::empty_root(), blocks);
  std::vector<std::uint8_t> buf(meta.size() * kBlockSize);
  for (std::size_t i = 0; i < meta.size(); ++i) {
    std::memcpy(buf.data() + i * kBlockSize, meta[i].data(), kBlockSize);
  }
  device.write(kSectorsPerBlock, buf);
  device.flush();
}

std::optional<std::string> SoundFs::load() {
  auto sbv = decode_superblock(dev_.read_block(kSuperblock));
  if (auto* err = std::get_if<std::string>(&sbv)) return *err;
  auto sb = std::get<Superblock>(sbv);
  if (sb.block_count != dev_.block_count()) return std::string("device size mismatch");

  auto txns = scan_journal([this](std::uint64_t b) -> const Block& { return dev_.read_block(b); },
                           sb.journal_seq);
  std::vector<IntentRecord> intents;
  for (const auto& txn : txns) {
    for (std::size_t i = 0; i < txn.homes.size(); ++i) {
      dev_.write(std::uint64_t{txn.homes[i]} * kSectorsPerBlock, txn.copies[i]);
    }
    intents.insert(intents.end(), txn.intents.begin(), txn.intents.end());
  }

  std::vector<const Block*> homes;
  for (std::uint32_t b = 1; b < kJournalStart; ++b) homes.push_back(&dev_.read_block(b));
  auto mv = decode_meta(homes, dev_.block_count());
  if (auto* err = std::get_if<std::string>(&mv)) return *err;
  mem_ = std::get<MetaState>(std::move(mv));
  if (auto err = replay_intents(mem_, intents)) return err;

  durable_meta_.clear();
  for (std::uint32_t b = 1; b < kJournalStart; ++b) durable_meta_.push_back(dev_.read_block(b));
  if (!txns.empty()) {
    dev_.flush();
    sb.journal_seq = txns.back().seq + 1;
    write_superblock(sb.journal_seq);
  }
  journal_seq_ = sb.journal_seq;
  journal_pos_ = 0;
  durable_ = mem_;
  used_mem_ = used_blocks(mem_, dev_.block_count());
  used_durable_ = used_mem_;
  return std::nullopt;
}

std::unique_ptr<FsHandle> SoundFs::clone() const { return std::make_unique<SoundFs>(*this); }

// ---- namespace helpers ----

SoundFs::Lookup SoundFs::lookup(std::string_view path) const {
  Lookup out;
  if (path == kRoot) {
    out.ino = kRootIno;
    return out;
  }
  auto parts = split_path(path);
  if (parts.empty()) {
    out.err = FsError::einval;
    return out;
  }
  // Recovered images may hold entries whose inode is gone; those read as EIO.
  auto corrupt = [&](std::uint32_t ino) {
    const Inode* n = inode(ino);
    return !n || (n->kind == EntryKind::dir && !mem_.dirs.count(ino));
  };
  std::uint32_t cur = kRootIno;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const auto& entries = mem_.dirs.at(cur);
    auto it = entries.find(parts[i]);
    if (it == entries.end()) {
      out.err = FsError::enoent;
      return out;
    }
    if (corrupt(it->second)) {
      out.err = FsError::eio;
      return out;
    }
    if (mem_.inodes.at(it->second).kind != EntryKind::dir) {
      out.err = FsError::enotdir;
      return out;
    }
    cur = it->second;
  }
  out.parent = cur;
  out.name = parts.back();
  if (!valid_name(out.name)) {
    out.err = FsError::einval;
    return out;
  }
  const auto& entries = mem_.dirs.at(cur);
  if (auto it = entries.find(out.name); it != entries.end()) {
    if (corrupt(it->second)) {
      out.err = FsError::eio;
      return out;
    }
    out.ino = it->second;
  }
  return out;
}

const Inode* SoundFs::inode(std::uint32_t ino) const {
  auto it = mem_.inodes.find(ino);
  return it == mem_.inodes.end() ? nullptr : &it->second;
}

std::optional<std::uint32_t> SoundFs::alloc_inode() const {
  for (std::uint32_t ino = kRootIno + 1; ino < kInodeCount; ++ino) {
    if (!mem_.inodes.count(ino) && !durable_.inodes.count(ino)) return ino;
  }
  return std::nullopt;
}

std::optional<std::uint32_t> SoundFs::alloc_block() {
  for (std::uint32_t b = kDataStart; b < used_mem_.size(); ++b) {
    if (!used_mem_[b] && !used_durable_[b]) {
      used_mem_[b] = true;
      return b;
    }
  }
  return std::nullopt;
}

void SoundFs::release_block(std::uint32_t pblk) { used_mem_[pblk] = false; }

void SoundFs::free_inode(std::uint32_t ino) {
  auto it = mem_.inodes.find(ino);
  for (const auto& [lblk, m] : it->second.blocks) release_block(m.pblk);
  dirty_.erase(ino);
  mem_.dirs.erase(ino);
  mem_.inodes.erase(it);
}

void SoundFs::drop_link(std::uint32_t ino) {
  Inode& node = mem_.inodes.at(ino);
  if (node.kind == EntryKind::dir || --node.nlink == 0) free_inode(ino);
}

// ---- data helpers ----

Block SoundFs::read_file_block(std::uint32_t ino, std::uint32_t lblk) const {
  if (auto d = dirty_.find(ino); d != dirty_.end()) {
    if (auto p = d->second.find(lblk); p != d->second.end()) return p->second;
  }
  const Inode* node = inode(ino);
  if (node) {
    if (auto m = node->blocks.find(lblk); m != node->blocks.end() && !m->second.unwritten) {
      return dev_.read_block(m->second.pblk);
    }
  }
  return zero_block();
}

Block& SoundFs::dirty_page(std::uint32_t ino, std::uint32_t lblk) {
  auto& pages = dirty_[ino];
  auto it = pages.find(lblk);
  if (it == pages.end()) it = pages.emplace(lblk, read_file_block(ino, lblk)).first;
  return it->second;
}

Digest SoundFs::content_hash(std::uint32_t ino, const Inode& node) const {
  Sha256 h;
  for (std::uint32_t lblk = 0; lblk < blocks_covering(node.size); ++lblk) {
    Block b = read_file_block(ino, lblk);
    std::uint64_t n = std::min<std::uint64_t>(kBlockSize, node.size - std::uint64_t{lblk} * kBlockSize);
    h.update(std::span<const std::uint8_t>(b.data(), n));
  }
  return h.finish();
}

EntryView SoundFs::entry_view(std::uint32_t ino) const {
  const Inode& node = mem_.inodes.at(ino);
  EntryView e;
  e.kind = node.kind;
  e.ino = ino;
  e.xattrs = node.xattrs;
  switch (node.kind) {
    case EntryKind::dir: {
      e.link_count = 2;
      for (const auto& [name, child] : mem_.dirs.at(ino)) {
        if (mem_.inodes.at(child).kind == EntryKind::dir) ++e.link_count;
      }
      break;
    }
    case EntryKind::symlink:
      e.size = node.symlink_target.size();
      e.link_count = node.nlink;
      e.data_hash = sha256(node.symlink_target);
      break;
    case EntryKind::file: {
      e.size = node.size;
      e.link_count = node.nlink;
      std::set<std::uint32_t> mapped;
      for (const auto& [lblk, m] : node.blocks) mapped.insert(lblk);
      if (auto d = dirty_.find(ino); d != dirty_.end()) {
        for (const auto& [lblk, page] : d->second) mapped.insert(lblk);
      }
      e.block_count = mapped.size() * kSectorsPerBlock;
      e.data_hash = content_hash(ino, node);
      break;
    }
  }
  return e;
}

FsStateView SoundFs::state_view() const {
  FsStateView view;
  view.entries[std::string(kRoot)] = entry_view(kRootIno);
  std::set<std::uint32_t> ancestors{kRootIno};
  auto walk = [&](auto&& self, std::uint32_t dir, const std::string& path) -> void {
    for (const auto& [name, child] : mem_.dirs.at(dir)) {
      std::string p = join_path(path, name);
      view.entries[p] = entry_view(child);
      if (mem_.inodes.at(child).kind == EntryKind::dir && ancestors.insert(child).second) {
        self(self, child, p);
        ancestors.erase(child);
      }
    }
  };
  walk(walk, kRootIno, std::string(kRoot));
  return view;
}

// ---- operations ----

FsError SoundFs::apply(const FsOp& op, std::uint32_t seed) {
  switch (op.kind) {
    case FsOpKind::creat: return do_creat(op);
    case FsOpKind::mkdir: return do_mkdir(op);
    case FsOpKind::write:
    case FsOpKind::dwrite:
    case FsOpKind::mwrite: return do_data(op, seed);
    case FsOpKind::falloc: return do_falloc(op);
    case FsOpKind::link: return do_link(op);
    case FsOpKind::symlink: return do_symlink(op);
    case FsOpKind::rename: return do_rename(op);
    case FsOpKind::unlink: return do_unlink(op, false);
    case FsOpKind::remove: return do_unlink(op, true);
    case FsOpKind::rmdir: return do_rmdir(op);
    case FsOpKind::truncate: return do_truncate(op);
    case FsOpKind::xattr: return do_xattr(op);
    case FsOpKind::fsync:
    case FsOpKind::fdatasync:
    case FsOpKind::sync:
    case FsOpKind::msync: return do_persist(op);
  }
  return FsError::einval;
}

FsError SoundFs::do_creat(const FsOp& op) {
  auto l = lookup(op.path);
  if (l.err != FsError::ok) return l.err;
  if (l.ino) return inode(*l.ino)->kind == EntryKind::dir ? FsError::eisdir : FsError::ok;
  auto ino = alloc_inode();
  if (!ino) return FsError::enospc;
  mem_.inodes[*ino] = Inode{};
  mem_.dirs.at(l.parent)[l.name] = *ino;
  return FsError::ok;
}

FsError SoundFs::do_mkdir(const FsOp& op) {
  auto l = lookup(op.path);
  if (l.err != FsError::ok) return l.err;
  if (l.ino) return FsError::eexist;
  auto ino = alloc_inode();
  if (!ino) return FsError::enospc;
  Inode node;
  node.kind = EntryKind::dir;
  node.nlink = 2;
  mem_.inodes[*ino] = node;
  mem_.dirs[*ino] = {};
  mem_.dirs.at(l.parent)[l.name] = *ino;
  return FsError::ok;
}

FsError SoundFs::do_data(const FsOp& op, std::uint32_t seed) {
  auto l = lookup(op.path);
  if (l.err != FsError::ok) return l.err;
  if (!l.ino) return FsError::enoent;
  Inode& node = mem_.inodes.at(*l.ino);
  if (node.kind == EntryKind::dir) return FsError::eisdir;
  if (node.kind != EntryKind::file || !op.range || op.range->length() == 0) return FsError::einval;
  const ByteRange r = *op.range;
  if (op.kind == FsOpKind::mwrite && r.end > node.size) return FsError::einval;
  if (op.kind == FsOpKind::dwrite) return do_dwrite(*l.ino, r, seed);
  for (std::uint32_t lblk = block_of(r.begin); lblk <= block_of(r.end - 1); ++lblk) {
    Block& page = dirty_page(*l.ino, lblk);
    std::uint64_t base = std::uint64_t{lblk} * kBlockSize;
    std::uint64_t from = std::max(r.begin, base), to = std::min(r.end, base + kBlockSize);
    fill_pattern(seed, from, std::span<std::uint8_t>(page.data() + (from - base), to - from));
  }
  if (op.kind == FsOpKind::write) node.size = std::max(node.size, r.end);
  return FsError::ok;
}

FsError SoundFs::do_dwrite(std::uint32_t ino, const ByteRange& r, std::uint32_t seed) {
  Inode& node = mem_.inodes.at(ino);
  bool had_delalloc = dirty_.count(ino) && !dirty_.at(ino).empty();
  if (r.end > node.size || had_delalloc) dwrite_holds_.insert(ino);
  // Each touched block is rewritten copy-on-write with any cached bytes merged.
  std::vector<std::pair<std::uint32_t, Block>> ios;
  for (std::uint32_t lblk = block_of(r.begin); lblk <= block_of(r.end - 1); ++lblk) {
    Block content = read_file_block(ino, lblk);
    std::uint64_t base = std::uint64_t{lblk} * kBlockSize;
    std::uint64_t from = std::max(r.begin, base), to = std::min(r.end, base + kBlockSize);
    fill_pattern(seed, from, std::span<std::uint8_t>(content.data() + (from - base), to - from));
    auto pblk = alloc_block();
    if (!pblk) return FsError::enospc;
    if (auto m = node.blocks.find(lblk); m != node.blocks.end()) release_block(m->second.pblk);
    node.blocks[lblk] = {*pblk, false};
    if (auto d = dirty_.find(ino); d != dirty_.end()) d->second.erase(lblk);
    ios.emplace_back(*pblk, content);
  }
  if (auto d = dirty_.find(ino); d != dirty_.end() && d->second.empty()) dirty_.erase(d);
  for (std::size_t i = 0; i < ios.size();) {
    std::size_t j = i + 1;
    while (j < ios.size() && ios[j].first == ios[j - 1].first + 1) ++j;
    std::vector<const Block*> run;
    for (std::size_t k = i; k < j; ++k) run.push_back(&ios[k].second);
    write_blocks(ios[i].first, run, false);
    i = j;
  }
  unflushed_ = true;
  node.size = std::max(node.size, r.end);
  return FsError::ok;
}

FsError SoundFs::do_falloc(const FsOp& op) {
  auto l = lookup(op.path);
  if (l.err != FsError::ok) return l.err;
  if (!l.ino) return FsError::enoent;
  std::uint32_t ino = *l.ino;
  Inode& node = mem_.inodes.at(ino);
  if (node.kind == EntryKind::dir) return FsError::eisdir;
  if (node.kind != EntryKind::file || !op.range || op.range->length() == 0) return FsError::einval;
  const ByteRange r = *op.range;
  std::uint32_t first = block_of(r.begin), last = block_of(r.end - 1);

  auto zero_part = [&](std::uint32_t lblk, bool only_if_backed) {
    bool backed = node.blocks.count(lblk) || (dirty_.count(ino) && dirty_.at(ino).count(lblk));
    if (only_if_backed && !backed) return;
    Block& page = dirty_page(ino, lblk);
    std::uint64_t base = std::uint64_t{lblk} * kBlockSize;
    std::uint64_t from = std::max(r.begin, base), to = std::min(r.end, base + kBlockSize);
    std::fill(page.begin() + (from - base), page.begin() + (to - base), 0);
  };
  auto full = [&](std::uint32_t lblk) {
    std::uint64_t base = std::uint64_t{lblk} * kBlockSize;
    return r.begin <= base && r.end >= base + kBlockSize;
  };
  auto drop_page = [&](std::uint32_t lblk) {
    if (auto d = dirty_.find(ino); d != dirty_.end()) {
      d->second.erase(lblk);
      if (d->second.empty()) dirty_.erase(d);
    }
  };

  switch (op.falloc) {
    case FallocMode::none:
    case FallocMode::keep_size:
      for (std::uint32_t lblk = first; lblk <= last; ++lblk) {
        if (node.blocks.count(lblk) || (dirty_.count(ino) && dirty_.at(ino).count(lblk))) continue;
        auto pblk = alloc_block();
        if (!pblk) return FsError::enospc;
        node.blocks[lblk] = {*pblk, true};
      }
      break;
    case FallocMode::zero_range:
    case FallocMode::zero_range_keep_size:
      for (std::uint32_t lblk = first; lblk <= last; ++lblk) {
        if (!full(lblk)) {
          zero_part(lblk, false);
          continue;
        }
        drop_page(lblk);
        if (auto m = node.blocks.find(lblk); m != node.blocks.end()) {
          m->second.unwritten = true;
        } else {
          auto pblk = alloc_block();
          if (!pblk) return FsError::enospc;
          node.blocks[lblk] = {*pblk, true};
        }
      }
      break;
    case FallocMode::punch_hole_keep_size:
      for (std::uint32_t lblk = first; lblk <= last; ++lblk) {
        if (!full(lblk)) {
          zero_part(lblk, true);
          continue;
        }
        drop_page(lblk);
        if (auto m = node.blocks.find(lblk); m != node.blocks.end()) {
          release_block(m->second.pblk);
          node.blocks.erase(m);
        }
      }
      break;
  }
  if (!keeps_size(op.falloc)) node.size = std::max(node.size, r.end);
  return FsError::ok;
}

FsError SoundFs::do_link(const FsOp& op) {
  auto src = lookup(op.path);
  if (src.err != FsError::ok) return src.err;
  if (!src.ino) return FsError::enoent;
  if (inode(*src.ino)->kind == EntryKind::dir) return FsError::eperm;
  auto dst = lookup(op.path2);
  if (dst.err != FsError::ok) return dst.err;
  if (dst.ino) return FsError::eexist;
  mem_.dirs.at(dst.parent)[dst.name] = *src.ino;
  ++mem_.inodes.at(*src.ino).nlink;
  links_since_sync_.push_back({dst.parent, dst.name, *src.ino});
  return FsError::ok;
}

FsError SoundFs::do_symlink(const FsOp& op) {
  if (op.path.empty() || op.path.size() > kMaxSymlinkLen) return FsError::einval;
  auto dst = lookup(op.path2);
  if (dst.err != FsError::ok) return dst.err;
  if (dst.ino) return FsError::eexist;
  auto ino = alloc_inode();
  if (!ino) return FsError::enospc;
  Inode node;
  node.kind = EntryKind::symlink;
  node.symlink_target = op.path;
  mem_.inodes[*ino] = node;
  mem_.dirs.at(dst.parent)[dst.name] = *ino;
  return FsError::ok;
}

FsError SoundFs::do_rename(const FsOp& op) {
  auto src = lookup(op.path);
  if (src.err != FsError::ok) return src.err;
  if (!src.ino) return FsError::enoent;
  if (op.path == kRoot) return FsError::einval;
  auto dst = lookup(op.path2);
  if (dst.err != FsError::ok) return dst.err;
  if (op.path2 == kRoot) return FsError::einval;
  std::uint32_t ino = *src.ino;
  if (dst.ino == ino) return FsError::ok;
  bool src_dir = inode(ino)->kind == EntryKind::dir;
  std::optional<EntryKind> replaced;
  if (dst.ino) {
    replaced = inode(*dst.ino)->kind;
    if (src_dir) {
      if (*replaced != EntryKind::dir) return FsError::enotdir;
      if (!mem_.dirs.at(*dst.ino).empty()) return FsError::enotempty;
    } else if (*replaced == EntryKind::dir) {
      return FsError::eisdir;
    }
  }
  if (src_dir && path_within(op.path2, op.path)) return FsError::einval;
  if (dst.ino) {
    mem_.dirs.at(dst.parent).erase(dst.name);
    drop_link(*dst.ino);
  }
  mem_.dirs.at(src.parent).erase(src.name);
  mem_.dirs.at(dst.parent)[dst.name] = ino;
  renames_since_sync_.push_back({{src.parent, src.name, ino},
                                 {dst.parent, dst.name, ino},
                                 replaced.has_value() && *replaced != EntryKind::dir});
  renamed_since_commit_.insert(ino);
  return FsError::ok;
}

FsError SoundFs::do_unlink(const FsOp& op, bool allow_dir) {
  auto l = lookup(op.path);
  if (l.err != FsError::ok) return l.err;
  if (!l.ino) return FsError::enoent;
  if (inode(*l.ino)->kind == EntryKind::dir) {
    if (allow_dir) return do_rmdir(op);
    return FsError::eisdir;
  }
  mem_.dirs.at(l.parent).erase(l.name);
  unlinks_since_commit_.push_back({l.parent, l.name, *l.ino});
  drop_link(*l.ino);
  return FsError::ok;
}

FsError SoundFs::do_rmdir(const FsOp& op) {
  if (op.path == kRoot) return FsError::einval;
  auto l = lookup(op.path);
  if (l.err != FsError::ok) return l.err;
  if (!l.ino) return FsError::enoent;
  if (inode(*l.ino)->kind != EntryKind::dir) return FsError::enotdir;
  if (!mem_.dirs.at(*l.ino).empty()) return FsError::enotempty;
  mem_.dirs.at(l.parent).erase(l.name);
  drop_link(*l.ino);
  return FsError::ok;
}

FsError SoundFs::do_truncate(const FsOp& op) {
  auto l = lookup(op.path);
  if (l.err != FsError::ok) return l.err;
  if (!l.ino) return FsError::enoent;
  std::uint32_t ino = *l.ino;
  Inode& node = mem_.inodes.at(ino);
  if (node.kind == EntryKind::dir) return FsError::eisdir;
  if (node.kind != EntryKind::file) return FsError::einval;
  if (op.size < node.size) {
    std::uint32_t keep = blocks_covering(op.size);
    for (auto it = node.blocks.lower_bound(keep); it != node.blocks.end();) {
      release_block(it->second.pblk);
      it = node.blocks.erase(it);
    }
    if (auto d = dirty_.find(ino); d != dirty_.end()) {
      d->second.erase(d->second.lower_bound(keep), d->second.end());
      if (d->second.empty()) dirty_.erase(d);
    }
    // Bytes past EOF inside the last block stay zero.
    if (op.size % kBlockSize != 0) {
      std::uint32_t lblk = block_of(op.size);
      bool backed = node.blocks.count(lblk) || (dirty_.count(ino) && dirty_.at(ino).count(lblk));
      if (backed) {
        Block& page = dirty_page(ino, lblk);
        std::fill(page.begin() + op.size % kBlockSize, page.end(), 0);
      }
    }
  }
  node.size = op.size;
  return FsError::ok;
}

FsError SoundFs::do_xattr(const FsOp& op) {
  auto l = lookup(op.path);
  if (l.err != FsError::ok) return l.err;
  if (!l.ino) return FsError::enoent;
  Inode& node = mem_.inodes.at(*l.ino);
  if (op.xattr_name.empty()) return FsError::einval;
  if (op.xattr_action == XattrAction::remove) {
    return node.xattrs.erase(op.xattr_name) ? FsError::ok : FsError::enodata;
  }
  std::size_t used = node.symlink_target.size() + 1;
  for (const auto& [k, v] : node.xattrs) {
    if (k != op.xattr_name) used += 2 + k.size() + v.size();
  }
  used += 2 + op.xattr_name.size() + op.xattr_value.size();
  if (used > kInlineSize || op.xattr_name.size() > 255 || op.xattr_value.size() > 255) {
    return FsError::enospc;
  }
  node.xattrs[op.xattr_name] = op.xattr_value;
  return FsError::ok;
}

FsError SoundFs::do_persist(const FsOp& op) {
  if (op.kind != FsOpKind::sync) {
    auto l = lookup(op.path);
    if (l.err != FsError::ok) return l.err;
    if (!l.ino) return FsError::enoent;
  }
  switch (op.kind) {
    case FsOpKind::fsync: commit(CommitKind::fsync); break;
    case FsOpKind::fdatasync: commit(CommitKind::fdatasync); break;
    case FsOpKind::msync: commit(CommitKind::msync); break;
    default: commit(CommitKind::sync); break;
  }
  return FsError::ok;
}

// ---- persistence ----

void SoundFs::write_blocks(std::uint32_t first, const std::vector<const Block*>& blocks, bool fua) {
  std::vector<std::uint8_t> buf(blocks.size() * kBlockSize);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::memcpy(buf.data() + i * kBlockSize, blocks[i]->data(), kBlockSize);
  }
  dev_.write(std::uint64_t{first} * kSectorsPerBlock, buf, fua);
}

void SoundFs::write_superblock(std::uint64_t journal_seq) {
  Block sb = encode_superblock({dev_.block_count(), journal_seq});
  write_blocks(kSuperblock, {&sb}, true);
}

void SoundFs::writeback() {
  std::vector<std::pair<std::uint32_t, Block>> ios = std::move(deferred_io_);
  std::size_t deferred_count = ios.size();
  deferred_io_.clear();
  for (auto& [ino, pages] : dirty_) {
    Inode& node = mem_.inodes.at(ino);
    bool defer = defer_data_io(ino);
    for (auto& [lblk, page] : pages) {
      auto pblk = alloc_block();
      if (!pblk) throw std::length_error("soundfs: out of data blocks");
      if (auto m = node.blocks.find(lblk); m != node.blocks.end()) release_block(m->second.pblk);
      node.blocks[lblk] = {*pblk, false};
      (defer ? deferred_io_ : ios).emplace_back(*pblk, std::move(page));
    }
  }
  dirty_.clear();
  // Deferred blocks from the previous commit go first, then new data in
  // allocation order, merged into runs of consecutive blocks.
  std::stable_sort(ios.begin() + static_cast<std::ptrdiff_t>(deferred_count), ios.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < ios.size();) {
    std::size_t j = i + 1;
    while (j < ios.size() && j != deferred_count && ios[j].first == ios[j - 1].first + 1) ++j;
    std::vector<const Block*> run;
    for (std::size_t k = i; k < j; ++k) run.push_back(&ios[k].second);
    write_blocks(ios[i].first, run, false);
    unflushed_ = true;
    i = j;
  }
}

void SoundFs::commit(CommitKind kind) {
  writeback();
  if (unflushed_) {
    dev_.flush();
    unflushed_ = false;
  }
  MetaState d = mem_;
  shape_commit(d, kind);
  auto blocks = encode_meta(d, dev_.block_count());
  Transaction txn;
  txn.seq = journal_seq_;
  for (std::uint32_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i] != durable_meta_[i]) {
      txn.homes.push_back(i + 1);
      txn.copies.push_back(blocks[i]);
    }
  }
  txn.intents = commit_intents();
  if (!txn.homes.empty() || !txn.intents.empty()) {
    std::size_t need = transaction_blocks(txn.copies.size());
    if (journal_pos_ + need > kJournalBlocks) {
      // Every earlier transaction is home and flushed; restart the journal.
      write_superblock(journal_seq_);
      journal_pos_ = 0;
    }
    auto enc = encode_transaction(txn);
    std::vector<const Block*> body;
    for (std::size_t i = 0; i + 1 < enc.size(); ++i) body.push_back(&enc[i]);
    write_blocks(kJournalStart + journal_pos_, body, false);
    dev_.flush();
    write_blocks(kJournalStart + journal_pos_ + static_cast<std::uint32_t>(enc.size()) - 1,
                 {&enc.back()}, true);
    for (std::size_t i = 0; i < txn.homes.size();) {
      std::size_t j = i + 1;
      while (j < txn.homes.size() && txn.homes[j] == txn.homes[j - 1] + 1) ++j;
      std::vector<const Block*> run;
      for (std::size_t k = i; k < j; ++k) run.push_back(&txn.copies[k]);
      write_blocks(txn.homes[i], run, false);
      i = j;
    }
    dev_.flush();
    for (std::size_t i = 0; i < txn.homes.size(); ++i) durable_meta_[txn.homes[i] - 1] = txn.copies[i];
    journal_pos_ += static_cast<std::uint32_t>(need);
    ++journal_seq_;
  }
  durable_ = std::move(d);
  used_durable_ = used_blocks(durable_, dev_.block_count());
  renamed_since_commit_.clear();
  unlinks_since_commit_.clear();
  if (is_global(kind)) {
    links_since_sync_.clear();
    renames_since_sync_.clear();
    dwrite_holds_.clear();
  }
}

DiskImage SoundFs::unmount_clean() {
  commit(CommitKind::unmount);
  if (!deferred_io_.empty()) {
    // Deferred data from this very commit still has to reach its blocks.
    writeback();
    dev_.flush();
    unflushed_ = false;
  }
  if (journal_pos_ > 0) {
    write_superblock(journal_seq_);
    journal_pos_ = 0;
  }
  return dev_.snapshot();
}

}  // namespace crashsim::fs::soundfs
