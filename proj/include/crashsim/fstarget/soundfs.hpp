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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crashsim/fstarget/soundfs_format.hpp"
#include "crashsim/fstarget/target.hpp"

namespace crashsim::fs::soundfs {

enum class CommitKind { fsync, fdatasync, sync, msync, unmount };

// sync and clean unmount; every other commit is file-scoped from the caller's
// point of view even though SoundFS commits globally.
bool is_global(CommitKind kind);

struct DirentRef {
  std::uint32_t parent = 0;
  std::string name;
  std::uint32_t ino = 0;
};

struct RenameRecord {
  DirentRef src;
  DirentRef dst;
  bool replaced_nondir = false;
};

// Correct journaling toy file system.
//
// In-memory metadata (the working state) is committed as a whole at every
// persistence call: dirty data is written copy-on-write to blocks free in both
// the working and the durable state, then the changed home blocks go through a
// physical redo journal (descriptor + copies, FLUSH, commit with FUA), then
// home, then FLUSH. Buggy variants override the protected hooks.
class SoundFs : public FsHandle {
 public:
  explicit SoundFs(blockdev::BlockDevice device);

  static void format(blockdev::BlockDevice& device);

  // Runs recovery and loads metadata. Returns the reason on failure.
  std::optional<std::string> load();

  FsError apply(const FsOp& op, std::uint32_t seed = 0) override;
  FsStateView state_view() const override;
  blockdev::DiskImage unmount_clean() override;
  blockdev::BlockDevice& device() override { return dev_; }
  std::unique_ptr<FsHandle> clone() const override;

  const MetaState& working_state() const { return mem_; }
  const MetaState& durable_state() const { return durable_; }

 protected:
  // Maps the working state to what this commit makes durable.
  virtual void shape_commit(MetaState& /*durable*/, CommitKind /*kind*/) const {}
  // Data blocks of this inode are allocated and journaled but written later.
  virtual bool defer_data_io(std::uint32_t /*ino*/) const { return false; }
  virtual std::vector<IntentRecord> commit_intents() const { return {}; }
  // Applied after journal replay; a returned string makes the mount fail.
  virtual std::optional<std::string> replay_intents(
      MetaState& /*state*/, const std::vector<IntentRecord>& /*intents*/) const {
    return std::nullopt;
  }

  const std::vector<DirentRef>& links_since_sync() const { return links_since_sync_; }
  const std::vector<RenameRecord>& renames_since_sync() const { return renames_since_sync_; }
  const std::set<std::uint32_t>& dwrite_holds() const { return dwrite_holds_; }
  const std::set<std::uint32_t>& renamed_since_commit() const { return renamed_since_commit_; }
  const std::vector<DirentRef>& unlinks_since_commit() const { return unlinks_since_commit_; }

 private:
  struct Lookup {
    FsError err = FsError::ok;
    std::uint32_t parent = 0;
    std::string name;
    std::optional<std::uint32_t> ino;
  };

  Lookup lookup(std::string_view path) const;
  const Inode* inode(std::uint32_t ino) const;
  std::optional<std::uint32_t> alloc_inode() const;
  std::optional<std::uint32_t> alloc_block();
  void release_block(std::uint32_t pblk);
  void drop_link(std::uint32_t ino);
  void free_inode(std::uint32_t ino);

  Block read_file_block(std::uint32_t ino, std::uint32_t lblk) const;
  Block& dirty_page(std::uint32_t ino, std::uint32_t lblk);
  Digest content_hash(std::uint32_t ino, const Inode& node) const;
  EntryView entry_view(std::uint32_t ino) const;

  FsError do_creat(const FsOp& op);
  FsError do_mkdir(const FsOp& op);
  FsError do_data(const FsOp& op, std::uint32_t seed);
  FsError do_dwrite(std::uint32_t ino, const ByteRange& r, std::uint32_t seed);
  FsError do_falloc(const FsOp& op);
  FsError do_link(const FsOp& op);
  FsError do_symlink(const FsOp& op);
  FsError do_rename(const FsOp& op);
  FsError do_unlink(const FsOp& op, bool allow_dir);
  FsError do_rmdir(const FsOp& op);
  FsError do_truncate(const FsOp& op);
  FsError do_xattr(const FsOp& op);
  FsError do_persist(const FsOp& op);

  void writeback();
  void commit(CommitKind kind);
  void write_blocks(std::uint32_t first, const std::vector<const Block*>& blocks, bool fua);
  void write_superblock(std::uint64_t journal_seq);

  blockdev::BlockDevice dev_;
  MetaState mem_;
  MetaState durable_;
  std::vector<Block> durable_meta_;  // on-disk home blocks 1..kJournalStart-1
  std::vector<bool> used_mem_;
  std::vector<bool> used_durable_;
  std::map<std::uint32_t, std::map<std::uint32_t, Block>> dirty_;
  std::vector<std::pair<std::uint32_t, Block>> deferred_io_;
  std::uint32_t journal_pos_ = 0;
  std::uint64_t journal_seq_ = 1;
  bool unflushed_ = false;

  std::vector<DirentRef> links_since_sync_;
  std::vector<RenameRecord> renames_since_sync_;
  std::set<std::uint32_t> dwrite_holds_;
  std::set<std::uint32_t> renamed_since_commit_;
  std::vector<DirentRef> unlinks_since_commit_;
};

// Structural check of an image; never modifies it.
FsckReport check_image(const blockdev::DiskImage& image);

}  // namespace crashsim::fs::soundfs
