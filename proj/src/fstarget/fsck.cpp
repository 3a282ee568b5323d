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

#include <map>
#include <set>

#include "crashsim/blockdev/disk_image.hpp"
#include "crashsim/fstarget/soundfs.hpp"

namespace crashsim::fs::soundfs {

FsckReport check_image(const blockdev::DiskImage& image) {
  FsckReport report;
  auto fail = [&](std::string problem, bool repairable) {
    report.consistent = false;
    report.repairable = report.repairable && repairable;
    report.problems.push_back(std::move(problem));
  };

  auto sbv = decode_superblock(image.block(kSuperblock));
  if (auto* err = std::get_if<std::string>(&sbv)) {
    fail(*err, false);
    return report;
  }
  auto sb = std::get<Superblock>(sbv);
  if (sb.block_count != image.block_count()) {
    fail("superblock block count disagrees with device size", false);
    return report;
  }

  blockdev::ImageWriter scratch(image);
  auto txns = scan_journal([&](std::uint64_t b) -> const Block& { return image.block(b); },
                           sb.journal_seq);
  for (const auto& txn : txns) {
    for (std::size_t i = 0; i < txn.homes.size(); ++i) {
      scratch.write(std::uint64_t{txn.homes[i]} * blockdev::kBlockSize, txn.copies[i]);
    }
  }
  if (!txns.empty()) {
    report.problems.push_back("journal holds " + std::to_string(txns.size()) +
                              " committed transaction(s) awaiting replay");
  }

  std::vector<const Block*> homes;
  for (std::uint32_t b = 1; b < kJournalStart; ++b) homes.push_back(&scratch.block(b));
  auto mv = decode_meta(homes, image.block_count());
  if (auto* err = std::get_if<std::string>(&mv)) {
    fail(*err, false);
    return report;
  }
  const auto& state = std::get<MetaState>(mv);

  for (const auto& txn : txns) {
    for (const auto& in : txn.intents) {
      auto dir = state.dirs.find(in.parent);
      if (dir == state.dirs.end()) continue;
      auto it = dir->second.find(in.name);
      if (it != dir->second.end() && it->second != in.ino) {
        fail("journal unlink record for '" + in.name + "' (inode " + std::to_string(in.ino) +
                 ") conflicts with live inode " + std::to_string(it->second),
             true);
      }
    }
  }

  std::map<std::uint32_t, std::uint32_t> refs;
  for (const auto& [parent, entries] : state.dirs) {
    for (const auto& [name, ino] : entries) ++refs[ino];
  }
  for (const auto& [ino, node] : state.inodes) {
    std::uint32_t n = refs.count(ino) ? refs.at(ino) : 0;
    if (ino == kRootIno) continue;
    if (n == 0) {
      fail("inode " + std::to_string(ino) + " is not referenced by any directory", true);
    } else if (node.kind == EntryKind::dir && n > 1) {
      fail("directory inode " + std::to_string(ino) + " has " + std::to_string(n) + " names", true);
    } else if (node.kind != EntryKind::dir && n != node.nlink) {
      fail("inode " + std::to_string(ino) + " link count " + std::to_string(node.nlink) +
               " but " + std::to_string(n) + " names",
           true);
    }
  }

  std::map<std::uint32_t, std::uint32_t> owners;
  for (const auto& [ino, node] : state.inodes) {
    for (const auto& [lblk, m] : node.blocks) {
      if (!owners.emplace(m.pblk, ino).second) {
        fail("block " + std::to_string(m.pblk) + " shared by inodes " +
                 std::to_string(owners.at(m.pblk)) + " and " + std::to_string(ino),
             false);
      }
    }
  }

  auto used = used_blocks(state, image.block_count());
  const Block& bitmap = *homes[kBitmapBlock - 1];
  for (std::uint64_t b = 0; b < used.size() && b < blockdev::kBlockSize * 8; ++b) {
    bool bit = (bitmap[b / 8] >> (b % 8)) & 1;
    if (bit != used[b]) {
      fail("bitmap disagrees with extent maps at block " + std::to_string(b), true);
      break;
    }
  }
  return report;
}

}  // namespace crashsim::fs::soundfs
