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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crashsim/blockdev/disk_image.hpp"
#include "crashsim/fstarget/state_view.hpp"

namespace crashsim::fs::soundfs {

using blockdev::Block;

// Block layout. Blocks [0, kJournalStart) are metadata home locations.
inline constexpr std::uint32_t kMagic = 0x46444E53;  // "SNDF"
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kSuperblock = 0;
inline constexpr std::uint32_t kBitmapBlock = 1;
inline constexpr std::uint32_t kInodeStart = 2;
inline constexpr std::uint32_t kInodeBlocks = 32;
inline constexpr std::uint32_t kInodeSize = 512;
inline constexpr std::uint32_t kInodesPerBlock = blockdev::kBlockSize / kInodeSize;
inline constexpr std::uint32_t kInodeCount = kInodeBlocks * kInodesPerBlock;
inline constexpr std::uint32_t kDirentStart = kInodeStart + kInodeBlocks;
inline constexpr std::uint32_t kDirentBlocks = 16;
inline constexpr std::uint32_t kDirentSize = 64;
inline constexpr std::uint32_t kDirentsPerBlock = blockdev::kBlockSize / kDirentSize;
inline constexpr std::uint32_t kDirentCount = kDirentBlocks * kDirentsPerBlock;
inline constexpr std::uint32_t kMaxNameLen = kDirentSize - 9;
inline constexpr std::uint32_t kJournalStart = kDirentStart + kDirentBlocks;
inline constexpr std::uint32_t kJournalBlocks = 64;
inline constexpr std::uint32_t kDataStart = kJournalStart + kJournalBlocks;
inline constexpr std::uint32_t kMinBlocks = kDataStart + 16;
inline constexpr std::uint32_t kMaxExtents = 32;
inline constexpr std::uint32_t kInlineOffset = 32 + kMaxExtents * 12;
inline constexpr std::uint32_t kInlineSize = kInodeSize - kInlineOffset;
inline constexpr std::uint32_t kRootIno = 1;

struct Mapping {
  std::uint32_t pblk = 0;
  bool unwritten = false;
  bool operator==(const Mapping&) const = default;
};

struct Inode {
  EntryKind kind = EntryKind::file;
  std::uint32_t nlink = 1;
  std::uint64_t size = 0;
  std::map<std::uint32_t, Mapping> blocks;  // logical block -> physical
  std::map<std::string, std::string> xattrs;
  std::string symlink_target;
  bool operator==(const Inode&) const = default;
};

// Logical metadata: everything the home blocks encode.
struct MetaState {
  std::map<std::uint32_t, Inode> inodes;
  std::map<std::uint32_t, std::map<std::string, std::uint32_t>> dirs;  // dir ino -> name -> ino

  bool operator==(const MetaState&) const = default;
  static MetaState empty_root();
};

struct Superblock {
  std::uint64_t block_count = 0;
  std::uint64_t journal_seq = 1;  // seq of the first transaction expected at the journal start
};

Block encode_superblock(const Superblock& sb);
std::variant<Superblock, std::string> decode_superblock(const Block& block);

// Home blocks [1, kJournalStart) for `state`; index 0 is block 1.
std::vector<Block> encode_meta(const MetaState& state, std::uint64_t device_blocks);
// Parses home blocks [1, kJournalStart). Returns an error string for any
// structural violation that prevents building a namespace.
std::variant<MetaState, std::string> decode_meta(const std::vector<const Block*>& blocks,
                                                 std::uint64_t device_blocks);

// Logical journal record; only unlink intents exist.
struct IntentRecord {
  std::uint32_t parent = 0;
  std::uint32_t ino = 0;
  std::string name;
  bool operator==(const IntentRecord&) const = default;
};

struct Transaction {
  std::uint64_t seq = 0;
  std::vector<std::uint32_t> homes;
  std::vector<Block> copies;
  std::vector<IntentRecord> intents;
};

inline constexpr std::uint32_t kDescMagic = 0x4353444A;    // "JDSC"
inline constexpr std::uint32_t kCommitMagic = 0x544D434A;  // "JCMT"

// Descriptor, copies, and commit block of one transaction.
std::vector<Block> encode_transaction(const Transaction& txn);
std::size_t transaction_blocks(std::size_t copies);

// Reads consecutive valid transactions from the journal region starting at
// its first block with sequence `first_seq`.
using BlockReader = std::function<const Block&(std::uint64_t)>;
std::vector<Transaction> scan_journal(const BlockReader& read, std::uint64_t first_seq);

// Bitmap of blocks referenced by `state` plus the fixed regions.
std::vector<bool> used_blocks(const MetaState& state, std::uint64_t device_blocks);

}  // namespace crashsim::fs::soundfs
