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

// Seeded buggy variants. Each overrides exactly one SoundFS hook; the
// pending-state bookkeeping they read is maintained by SoundFS itself.

#include <stdexcept>

#include "crashsim/fstarget/soundfs.hpp"

namespace crashsim::fs {
namespace {

using soundfs::CommitKind;
using soundfs::MetaState;
using soundfs::SoundFs;

template <class Self>
class Cloneable : public SoundFs {
 public:
  using SoundFs::SoundFs;
  std::unique_ptr<FsHandle> clone() const override {
    return std::make_unique<Self>(static_cast<const Self&>(*this));
  }
};

// B1: links made since the last sync are left out of non-global commits.
class LinkLossFs : public Cloneable<LinkLossFs> {
 public:
  using Cloneable::Cloneable;

 protected:
  void shape_commit(MetaState& d, CommitKind kind) const override {
    if (soundfs::is_global(kind)) return;
    for (const auto& l : links_since_sync()) {
      auto dir = d.dirs.find(l.parent);
      if (dir == d.dirs.end()) continue;
      auto it = dir->second.find(l.name);
      if (it == dir->second.end() || it->second != l.ino) continue;
      auto pd = durable_state().dirs.find(l.parent);
      bool durable = pd != durable_state().dirs.end() && pd->second.count(l.name) &&
                     pd->second.at(l.name) == l.ino;
      if (!durable) dir->second.erase(it);
    }
  }
};

// B2: a rename's second half waits for a global commit. Replacing renames
// lose the new name; the rest keep the old one.
class RenameSplitFs : public Cloneable<RenameSplitFs> {
 public:
  using Cloneable::Cloneable;

 protected:
  void shape_commit(MetaState& d, CommitKind kind) const override {
    if (soundfs::is_global(kind)) return;
    for (const auto& r : renames_since_sync()) {
      if (r.replaced_nondir) {
        auto dir = d.dirs.find(r.dst.parent);
        if (dir != d.dirs.end()) {
          auto it = dir->second.find(r.dst.name);
          if (it != dir->second.end() && it->second == r.dst.ino) dir->second.erase(it);
        }
        continue;
      }
      auto dir = d.dirs.find(r.src.parent);
      if (dir == d.dirs.end() || !d.inodes.count(r.src.ino)) continue;
      dir->second.emplace(r.src.name, r.src.ino);
    }
  }
};

// B3: file-scoped commits drop newly allocated blocks past EOF.
class FallocLossFs : public Cloneable<FallocLossFs> {
 public:
  using Cloneable::Cloneable;

 protected:
  void shape_commit(MetaState& d, CommitKind kind) const override {
    if (kind != CommitKind::fsync && kind != CommitKind::fdatasync) return;
    for (auto& [ino, node] : d.inodes) {
      if (node.kind != EntryKind::file) continue;
      auto eof = static_cast<std::uint32_t>((node.size + blockdev::kBlockSize - 1) /
                                            blockdev::kBlockSize);
      const soundfs::Inode* old = nullptr;
      if (auto it = durable_state().inodes.find(ino); it != durable_state().inodes.end()) {
        old = &it->second;
      }
      for (auto it = node.blocks.lower_bound(eof); it != node.blocks.end();) {
        if (old && old->blocks.count(it->first)) {
          ++it;
        } else {
          it = node.blocks.erase(it);
        }
      }
    }
  }
};

// B4: direct writes that extend a file, or land on cached data, leave the
// durable size where it was until a global commit.
class DwriteSizeFs : public Cloneable<DwriteSizeFs> {
 public:
  using Cloneable::Cloneable;

 protected:
  void shape_commit(MetaState& d, CommitKind kind) const override {
    if (soundfs::is_global(kind)) return;
    for (auto ino : dwrite_holds()) {
      auto it = d.inodes.find(ino);
      if (it == d.inodes.end()) continue;
      auto old = durable_state().inodes.find(ino);
      it->second.size = old == durable_state().inodes.end() ? 0 : old->second.size;
    }
  }
};

// B5: data of files renamed since the last commit is written after the
// metadata that points at it.
class RenameBeforeDataFs : public Cloneable<RenameBeforeDataFs> {
 public:
  using Cloneable::Cloneable;

 protected:
  bool defer_data_io(std::uint32_t ino) const override {
    return renamed_since_commit().count(ino) > 0;
  }
};

// B6: unlinks are also journaled by name and replayed after recovery; a name
// that now belongs to another inode aborts the mount.
class UnlinkReplayFs : public Cloneable<UnlinkReplayFs> {
 public:
  using Cloneable::Cloneable;

 protected:
  std::vector<soundfs::IntentRecord> commit_intents() const override {
    std::vector<soundfs::IntentRecord> out;
    for (const auto& u : unlinks_since_commit()) out.push_back({u.parent, u.ino, u.name});
    return out;
  }

  std::optional<std::string> replay_intents(
      MetaState& state, const std::vector<soundfs::IntentRecord>& intents) const override {
    for (const auto& in : intents) {
      auto dir = state.dirs.find(in.parent);
      if (dir == state.dirs.end()) continue;
      auto it = dir->second.find(in.name);
      if (it == dir->second.end() || it->second == in.ino) continue;
      return "log replay: unlink of '" + in.name + "' expected inode " + std::to_string(in.ino) +
             ", found " + std::to_string(it->second);
    }
    return std::nullopt;
  }
};

template <class Fs>
class SoundFsTarget : public FsTarget {
 public:
  SoundFsTarget(std::string name, std::optional<BugSeed> seed)
      : name_(std::move(name)), seed_(std::move(seed)) {}

  std::string name() const override { return name_; }
  std::string version() const override { return "1"; }
  PersistenceGuaranteeSpec guarantees() const override { return {}; }
  std::optional<BugSeed> seed() const override { return seed_; }

  void mkfs(blockdev::BlockDevice& device) const override { SoundFs::format(device); }

  MountResult mount(blockdev::BlockDevice device) const override {
    auto fs = std::make_unique<Fs>(std::move(device));
    if (auto err = fs->load()) return Unmountable{*err};
    return std::unique_ptr<FsHandle>(std::move(fs));
  }

  FsckReport fsck(const blockdev::DiskImage& image) const override {
    return soundfs::check_image(image);
  }

 private:
  std::string name_;
  std::optional<BugSeed> seed_;
};

struct Registry {
  std::vector<std::unique_ptr<FsTarget>> targets;

  Registry() {
    using K = FsOpKind;
    targets.push_back(std::make_unique<SoundFsTarget<SoundFs>>("soundfs", std::nullopt));
    targets.push_back(std::make_unique<SoundFsTarget<LinkLossFs>>(
        "bugfs-b1", BugSeed{"B1", "fsync does not persist new hard links", {K::link},
                            "file_missing", {"new-05", "new-07"}}));
    targets.push_back(std::make_unique<SoundFsTarget<RenameSplitFs>>(
        "bugfs-b2",
        BugSeed{"B2", "rename is not atomic across a crash", {K::rename}, "spurious_entry",
                {"new-01", "new-02"}}));
    targets.push_back(std::make_unique<SoundFsTarget<FallocLossFs>>(
        "bugfs-b3", BugSeed{"B3", "blocks allocated beyond EOF are lost on fsync/fdatasync",
                            {K::falloc}, "metadata_mismatch:block_count", {"known-02", "new-08"}}));
    targets.push_back(std::make_unique<SoundFsTarget<DwriteSizeFs>>(
        "bugfs-b4", BugSeed{"B4", "direct write journals a stale file size", {K::dwrite},
                            "metadata_mismatch:size", {"known-04"}}));
    targets.push_back(std::make_unique<SoundFsTarget<RenameBeforeDataFs>>(
        "bugfs-b5", BugSeed{"B5", "rename reaches disk before the file's new data",
                            {K::write, K::rename}, "data_mismatch", {}}));
    targets.push_back(std::make_unique<SoundFsTarget<UnlinkReplayFs>>(
        "bugfs-b6", BugSeed{"B6", "log replay re-applies an unlink to a reused name",
                            {K::unlink, K::creat}, "unmountable", {"figure-01", "known-05"}}));
  }
};

const Registry& registry() {
  static const Registry r;
  return r;
}

}  // namespace

const FsTarget& find_target(const std::string& name) {
  for (const auto& t : registry().targets) {
    if (t->name() == name) return *t;
  }
  throw std::invalid_argument("unknown fs target '" + name + "'");
}

std::vector<std::string> target_names() {
  std::vector<std::string> out;
  for (const auto& t : registry().targets) out.push_back(t->name());
  return out;
}

}  // namespace crashsim::fs
