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

#include <gtest/gtest.h>

#include <random>

namespace crashsim::fs::soundfs {
namespace {

constexpr std::uint64_t kBlocks = 1024;

MetaState random_state(std::mt19937& rng) {
  MetaState s = MetaState::empty_root();
  std::vector<std::uint32_t> dirs{kRootIno};
  std::uint32_t next_pblk = kDataStart;
  for (std::uint32_t ino = 2; ino < 40; ++ino) {
    if (rng() % 3 == 0) continue;
    Inode node;
    node.kind = static_cast<EntryKind>(rng() % 3);
    node.nlink = node.kind == EntryKind::dir ? 2 : 1 + rng() % 3;
    node.size = rng() % 100000;
    if (node.kind == EntryKind::file) {
      for (std::uint32_t l = 0; l < rng() % 6; ++l) {
        node.blocks[l * 2 + rng() % 2] = {next_pblk, rng() % 2 == 0};
        next_pblk += 1 + rng() % 2;
      }
    }
    if (node.kind == EntryKind::symlink) node.symlink_target = "target" + std::to_string(ino);
    if (rng() % 2) node.xattrs["user.a"] = "v" + std::to_string(rng() % 100);
    std::uint32_t parent = dirs[rng() % dirs.size()];
    s.dirs[parent]["n" + std::to_string(ino)] = ino;
    if (node.kind == EntryKind::dir) {
      s.dirs[ino];
      dirs.push_back(ino);
    }
    s.inodes[ino] = node;
  }
  return s;
}

std::vector<const Block*> ptrs(const std::vector<Block>& blocks) {
  std::vector<const Block*> out;
  for (const auto& b : blocks) out.push_back(&b);
  return out;
}

TEST(FormatTest, MetaRoundTrip) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_state(rng);
    auto blocks = encode_meta(s, kBlocks);
    auto back = decode_meta(ptrs(blocks), kBlocks);
    ASSERT_TRUE(std::holds_alternative<MetaState>(back)) << std::get<std::string>(back);
    EXPECT_EQ(std::get<MetaState>(back), s);
    EXPECT_EQ(encode_meta(std::get<MetaState>(back), kBlocks), blocks);
  }
}

TEST(FormatTest, ZeroMetadataRejected) {
  std::vector<Block> zeros(kJournalStart - 1, Block{});
  EXPECT_TRUE(std::holds_alternative<std::string>(decode_meta(ptrs(zeros), kBlocks)));
}

TEST(FormatTest, SuperblockChecksum) {
  auto b = encode_superblock({kBlocks, 7});
  auto sb = decode_superblock(b);
  ASSERT_TRUE(std::holds_alternative<Superblock>(sb));
  EXPECT_EQ(std::get<Superblock>(sb).journal_seq, 7u);
  b[45] ^= 1;
  EXPECT_TRUE(std::holds_alternative<std::string>(decode_superblock(b)));
}

TEST(FormatTest, JournalScanStopsAtTornTransaction) {
  std::vector<Block> journal(kJournalStart + kJournalBlocks, Block{});
  auto place = [&](std::uint32_t pos, const Transaction& t) {
    auto enc = encode_transaction(t);
    for (std::size_t i = 0; i < enc.size(); ++i) journal[kJournalStart + pos + i] = enc[i];
    return static_cast<std::uint32_t>(enc.size());
  };
  Block a{}, b{};
  a[0] = 1;
  b[0] = 2;
  std::uint32_t pos = place(0, {5, {3}, {a}, {}});
  place(pos, {6, {4, 5}, {a, b}, {{1, 9, "foo"}}});
  BlockReader read = [&](std::uint64_t i) -> const Block& { return journal[i]; };

  auto txns = scan_journal(read, 5);
  ASSERT_EQ(txns.size(), 2u);
  EXPECT_EQ(txns[1].homes, (std::vector<std::uint32_t>{4, 5}));
  ASSERT_EQ(txns[1].intents.size(), 1u);
  EXPECT_EQ(txns[1].intents[0], (IntentRecord{1, 9, "foo"}));

  EXPECT_TRUE(scan_journal(read, 6).empty());  // stale start
  journal[kJournalStart + pos + 2][7] ^= 1;     // corrupt a copy of txn 6
  EXPECT_EQ(scan_journal(read, 5).size(), 1u);
}

}  // namespace
}  // namespace crashsim::fs::soundfs
