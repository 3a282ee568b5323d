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

#include "crashsim/harness/harness.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <mutex>
#include <sstream>

namespace crashsim::harness {

using blockdev::BlockDevice;
using blockdev::DiskImage;
using fs::EntryKind;
using fs::FsError;
using fs::FsOp;
using fs::FsOpKind;
using fs::FsStateView;

namespace {

constexpr std::string_view kProbeName = "crashsim_probe";

std::vector<std::string> aliases_of(const FsStateView& view, const std::string& path) {
  const auto* e = view.find(path);
  if (!e) return {};
  if (e->kind == EntryKind::dir) return {path};
  std::vector<std::string> out;
  for (const auto& [p, other] : view.entries) {
    if (other.kind != EntryKind::dir && other.ino == e->ino) out.push_back(p);
  }
  return out;
}

std::vector<std::string> ancestors(const std::string& path) {
  std::vector<std::string> out;
  if (path == fs::kRoot) return out;
  std::string cur = path;
  do {
    cur = fs::parent_path(cur);
    out.push_back(cur);
  } while (cur != fs::kRoot);
  return out;
}

void record_history(History& h, const FsStateView& view) {
  std::map<std::uint32_t, std::vector<std::string>> by_ino;
  for (const auto& [p, e] : view.entries) {
    h.paths.insert(p);
    if (e.kind != EntryKind::dir) by_ino[e.ino].push_back(p);
  }
  for (const auto& [ino, names] : by_ino) {
    for (const auto& a : names) {
      for (const auto& b : names) {
        if (a != b) h.aliases.insert({a, b});
      }
    }
  }
}

std::vector<std::pair<FsOp, bool>> all_ops(const ace::Workload& w) {
  std::vector<std::pair<FsOp, bool>> out;
  for (const auto& op : w.prologue) out.emplace_back(op, true);
  for (const auto& op : w.body) out.emplace_back(op, false);
  return out;
}

std::unique_ptr<fs::FsHandle> mount_image(const fs::FsTarget& target, const DiskImage& image,
                                          std::string* why = nullptr) {
  auto m = target.mount(BlockDevice::create(image.size_bytes(), image));
  if (auto* u = std::get_if<fs::Unmountable>(&m)) {
    if (why) *why = u->reason;
    return nullptr;
  }
  return std::move(std::get<std::unique_ptr<fs::FsHandle>>(m));
}

std::string xattr_text(const std::map<std::string, std::string>& xs) {
  std::string out = "{";
  for (const auto& [k, v] : xs) out += (out.size() > 1 ? "," : "") + k + "=" + v;
  return out + "}";
}

}  // namespace

const DiskImage& fresh_image(const fs::FsTarget& target) {
  static std::mutex mu;
  static std::map<std::string, DiskImage> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(target.name());
  if (it == cache.end()) {
    auto dev = BlockDevice::create(kDeviceSize);
    target.mkfs(dev);
    it = cache.emplace(target.name(), dev.snapshot()).first;
  }
  return it->second;
}

void apply_modification(PersistedSet& set, const FsOp& op, const FsStateView& before,
                        const FsStateView& after) {
  (void)after;
  auto drop_meta = [&](const std::string& path, bool data_too) {
    for (const auto& a : aliases_of(before, path)) {
      if (auto it = set.find(a); it != set.end()) {
        it->second.meta = false;
        if (data_too) it->second.data = false;
      }
    }
  };
  auto drop_listing = [&](const std::string& path) {
    if (auto it = set.find(fs::parent_path(path)); it != set.end()) it->second.listing = false;
  };
  auto drop_subtree = [&](const std::string& path) {
    for (auto it = set.begin(); it != set.end();) {
      it = fs::path_within(it->first, path) && it->first != fs::kRoot ? set.erase(it) : std::next(it);
    }
  };

  switch (op.kind) {
    case FsOpKind::write:
    case FsOpKind::dwrite:
    case FsOpKind::mwrite:
    case FsOpKind::falloc:
    case FsOpKind::truncate: drop_meta(op.path, true); break;
    case FsOpKind::xattr: drop_meta(op.path, false); break;
    case FsOpKind::creat:
      if (!before.find(op.path)) drop_listing(op.path);
      break;
    case FsOpKind::mkdir: drop_listing(op.path); break;
    case FsOpKind::symlink: drop_listing(op.path2); break;
    case FsOpKind::link:
      drop_meta(op.path, false);
      drop_listing(op.path2);
      break;
    case FsOpKind::rename: {
      const auto* src = before.find(op.path);
      const auto* dst = before.find(op.path2);
      if (src && dst && src->ino == dst->ino) break;
      if (dst) drop_meta(op.path2, false);
      drop_subtree(op.path);
      drop_subtree(op.path2);
      drop_listing(op.path);
      drop_listing(op.path2);
      break;
    }
    case FsOpKind::unlink:
    case FsOpKind::remove:
    case FsOpKind::rmdir:
      drop_meta(op.path, false);
      drop_subtree(op.path);
      drop_listing(op.path);
      break;
    default: break;
  }
  for (auto it = set.begin(); it != set.end();) it = it->second.any() ? std::next(it) : set.erase(it);
}

void apply_persistence(PersistedSet& set, const FsOp& op, const FsStateView& now,
                       const fs::PersistenceGuaranteeSpec& spec) {
  auto mark_ancestors = [&](const std::string& path) {
    for (const auto& a : ancestors(path)) set[a].name = true;
  };
  auto persist_dir = [&](const std::string& dir) {
    auto& p = set[dir];
    p.name = p.meta = true;
    mark_ancestors(dir);
    if (!spec.fsync_dir_persists_children_entries) return;
    p.listing = true;
    for (const auto& [path, e] : now.entries) {
      if (path != fs::kRoot && fs::parent_path(path) == dir) set[path].name = true;
    }
  };

  if (op.kind == FsOpKind::sync) {
    for (const auto& [path, e] : now.entries) {
      auto& p = set[path];
      p.name = p.data = p.meta = true;
      p.listing = e.kind == EntryKind::dir;
    }
    return;
  }
  const auto* e = now.find(op.path);
  if (!e) return;
  if (e->kind == EntryKind::dir) {
    // fdatasync on a directory behaves like fsync.
    persist_dir(op.path);
    return;
  }
  if (op.kind == FsOpKind::msync) {
    set[op.path].data = true;
    return;
  }
  if (op.kind == FsOpKind::fdatasync) {
    // Allocation is part of what a data sync must make readable; names are not.
    auto& p = set[op.path];
    p.data = p.meta = true;
    return;
  }
  std::vector<std::string> names =
      spec.fsync_file_persists_all_hard_links ? aliases_of(now, op.path) : std::vector<std::string>{op.path};
  for (const auto& n : names) {
    auto& p = set[n];
    p.data = p.meta = true;
    if (spec.fsync_file_persists_parent_dirent) {
      p.name = true;
      mark_ancestors(n);
    }
  }
}

Profile profile(const ace::Workload& w, const fs::FsTarget& target) {
  Profile p;
  p.workload = w;
  p.target = target.name();
  p.base_image = fresh_image(target);
  std::string why;
  auto fsh = mount_image(target, p.base_image, &why);
  if (!fsh) {
    p.error = "fresh image does not mount: " + why;
    return p;
  }
  FsStateView before = fsh->state_view();
  record_history(p.history, before);
  PersistedSet current;
  std::size_t index = 0;
  for (const auto& [op, in_prologue] : all_ops(w)) {
    TraceEntry entry{op, in_prologue, fsh->apply(op, op_seed(index++)), std::nullopt};
    if (entry.result != FsError::ok) {
      p.error = ace::serialize_op(op) + " failed with " + std::string(fs::error_name(entry.result));
      p.trace.push_back(entry);
      break;
    }
    if (fs::is_persistence(op.kind)) {
      entry.checkpoint_id = fsh->device().insert_checkpoint();
      apply_persistence(current, op, before, target.guarantees());
      p.persisted.push_back(current);
      p.oracles.push_back(fsh->clone()->unmount_clean());
    } else {
      FsStateView after = fsh->state_view();
      apply_modification(current, op, before, after);
      record_history(p.history, after);
      before = std::move(after);
    }
    p.trace.push_back(entry);
  }
  p.io_log = fsh->device().log();
  return p;
}

std::vector<DiskImage> oracles_by_restart(const ace::Workload& w, const fs::FsTarget& target) {
  auto ops = all_ops(w);
  std::vector<std::size_t> persist_at;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (fs::is_persistence(ops[i].first.kind)) persist_at.push_back(i);
  }
  std::vector<DiskImage> out;
  for (std::size_t stop : persist_at) {
    auto fsh = mount_image(target, fresh_image(target));
    for (std::size_t i = 0; i <= stop; ++i) fsh->apply(ops[i].first, op_seed(i));
    out.push_back(fsh->unmount_clean());
  }
  return out;
}

std::string_view diff_kind_name(DiffKind k) {
  switch (k) {
    case DiffKind::unmountable: return "unmountable";
    case DiffKind::spurious: return "spurious";
    case DiffKind::missing: return "missing";
    case DiffKind::data: return "data";
    case DiffKind::size: return "size";
    case DiffKind::link_count: return "link_count";
    case DiffKind::block_count: return "block_count";
    case DiffKind::xattr: return "xattr";
    case DiffKind::unwritable: return "unwritable";
  }
  return "?";
}

std::optional<DiffKind> diff_kind_from_name(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(DiffKind::unwritable); ++i) {
    if (diff_kind_name(static_cast<DiffKind>(i)) == name) return static_cast<DiffKind>(i);
  }
  return std::nullopt;
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::bug: return "bug";
    case Outcome::harness_error: return "harness_error";
  }
  return "?";
}

std::vector<DiffEntry> compare_views(const FsStateView& crash, const FsStateView& oracle,
                                     const PersistedSet& persisted, const History& history) {
  std::vector<DiffEntry> out;
  auto add = [&](DiffKind k, const std::string& path, std::string expected, std::string actual) {
    out.push_back({k, path, std::move(expected), std::move(actual)});
  };

  // Entries that no reachable state explains.
  std::map<std::uint32_t, std::vector<std::string>> file_names, dir_names;
  for (const auto& [path, e] : crash.entries) {
    if (path == fs::kRoot) continue;
    if (!history.paths.count(path)) add(DiffKind::spurious, path, "absent", describe(e));
    (e.kind == EntryKind::dir ? dir_names : file_names)[e.ino].push_back(path);
  }
  for (const auto& [ino, names] : file_names) {
    for (std::size_t i = 1; i < names.size(); ++i) {
      if (!history.aliases.count({names[0], names[i]})) {
        add(DiffKind::spurious, names[i], "not linked to " + names[0], "linked to " + names[0]);
      }
    }
  }
  for (const auto& [ino, names] : dir_names) {
    for (std::size_t i = 1; i < names.size(); ++i) {
      add(DiffKind::spurious, names[i], "single name", "same directory as " + names[0]);
    }
  }
  for (const auto& [dir, p] : persisted) {
    if (!p.listing) continue;
    for (const auto& [path, e] : crash.entries) {
      if (path == fs::kRoot || fs::parent_path(path) != dir || oracle.find(path)) continue;
      add(DiffKind::spurious, path, "absent", describe(e));
    }
  }

  for (const auto& [path, p] : persisted) {
    const auto* o = oracle.find(path);
    const auto* c = crash.find(path);
    if (!o) continue;
    if (!c) {
      if (p.name) add(DiffKind::missing, path, describe(*o), "absent");
      continue;
    }
    if (c->kind != o->kind) {
      add(DiffKind::missing, path, describe(*o), describe(*c));
      continue;
    }
    if (p.data && o->kind != EntryKind::dir) {
      if (c->size != o->size) {
        add(DiffKind::size, path, std::to_string(o->size), std::to_string(c->size));
      } else if (c->data_hash != o->data_hash) {
        add(DiffKind::data, path, to_hex(o->data_hash).substr(0, 16), to_hex(c->data_hash).substr(0, 16));
      }
    }
    if (p.meta) {
      if (o->kind != EntryKind::dir && c->link_count != o->link_count) {
        add(DiffKind::link_count, path, std::to_string(o->link_count), std::to_string(c->link_count));
      }
      if (o->kind == EntryKind::file && c->block_count != o->block_count) {
        add(DiffKind::block_count, path, std::to_string(o->block_count) + " sectors",
            std::to_string(c->block_count) + " sectors");
      }
      if (c->xattrs != o->xattrs) add(DiffKind::xattr, path, xattr_text(o->xattrs), xattr_text(c->xattrs));
    }
  }
  std::sort(out.begin(), out.end(), [](const DiffEntry& a, const DiffEntry& b) {
    return std::tie(a.kind, a.path, a.expected, a.actual) < std::tie(b.kind, b.path, b.expected, b.actual);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Probes every affected directory, then removes the whole tree.
std::vector<DiffEntry> write_checks(fs::FsHandle& h, const FsStateView& view, const PersistedSet& persisted) {
  std::vector<DiffEntry> out;
  std::set<std::string> dirs;
  for (const auto& [path, p] : persisted) {
    const auto* e = view.find(path);
    if (!e) continue;
    dirs.insert(e->kind == EntryKind::dir ? path : fs::parent_path(path));
  }
  for (const auto& d : dirs) {
    std::string probe = fs::join_path(d, kProbeName);
    FsOp w{FsOpKind::write, probe};
    w.range = fs::ByteRange{0, 4096};
    const std::vector<FsOp> steps = {FsOp{FsOpKind::creat, probe}, w, FsOp{FsOpKind::unlink, probe},
                                     FsOp{FsOpKind::mkdir, probe}, FsOp{FsOpKind::rmdir, probe}};
    for (const auto& op : steps) {
      auto err = h.apply(op);
      if (err != FsError::ok) {
        out.push_back({DiffKind::unwritable, d, "writable",
                       ace::serialize_op(op) + ": " + std::string(fs::error_name(err))});
        break;
      }
    }
  }
  std::vector<std::pair<std::size_t, std::string>> order;
  for (const auto& [path, e] : view.entries) {
    if (path != fs::kRoot) order.emplace_back(fs::split_path(path).size(), path);
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (const auto& [depth, path] : order) {
    bool dir = view.find(path)->kind == EntryKind::dir;
    auto err = h.apply(FsOp{dir ? FsOpKind::rmdir : FsOpKind::unlink, path});
    if (err != FsError::ok) {
      out.push_back({DiffKind::unwritable, path, "removable", std::string(fs::error_name(err))});
      break;
    }
  }
  return out;
}

Verdict check_against(const DiskImage& crash_image, const FsStateView& oracle, const PersistedSet& persisted,
                      const History& history, const fs::FsTarget& target) {
  Verdict v;
  std::string why;
  auto h = mount_image(target, crash_image, &why);
  if (!h) {
    v.outcome = Outcome::bug;
    v.diff.push_back({DiffKind::unmountable, std::string(fs::kRoot), "mountable", why});
    v.fsck = target.fsck(crash_image);
    return v;
  }
  auto view = h->state_view();
  v.diff = compare_views(view, oracle, persisted, history);
  for (auto& d : write_checks(*h, view, persisted)) v.diff.push_back(std::move(d));
  v.outcome = v.diff.empty() ? Outcome::pass : Outcome::bug;
  return v;
}

FsStateView view_of(const DiskImage& image, const fs::FsTarget& target) {
  std::string why;
  auto h = mount_image(target, image, &why);
  if (!h) throw std::runtime_error("oracle image does not mount: " + why);
  return h->state_view();
}

// Lazily mounted oracle views of one profile.
class Oracles {
 public:
  Oracles(const Profile& p, const fs::FsTarget& target) : p_(p), target_(target), views_(p.oracles.size() + 1) {}

  const FsStateView& view(std::uint32_t k) {
    if (!views_[k]) views_[k] = view_of(k == 0 ? p_.base_image : p_.oracles[k - 1], target_);
    return *views_[k];
  }
  const PersistedSet& persisted(std::uint32_t k) const {
    static const PersistedSet kEmpty;
    return k == 0 ? kEmpty : p_.persisted[k - 1];
  }

 private:
  const Profile& p_;
  const fs::FsTarget& target_;
  std::vector<std::optional<FsStateView>> views_;
};

// A subset state lands between checkpoints k and k+1: it must satisfy one of them.
Verdict check_relaxed(const DiskImage& image, std::uint32_t k, Oracles& oracles, const Profile& p,
                      const fs::FsTarget& target) {
  Verdict v = check_against(image, oracles.view(k), oracles.persisted(k), p.history, target);
  if (v.outcome == Outcome::pass || k + 1 > p.checkpoint_count()) return v;
  Verdict next = check_against(image, oracles.view(k + 1), oracles.persisted(k + 1), p.history, target);
  return next.outcome == Outcome::pass ? next : v;
}

std::uint32_t checkpoint_before_epoch(const blockdev::EpochSplit& split, std::size_t epoch) {
  std::uint32_t k = 0;
  for (const auto& m : split.checkpoints) {
    if (m.epoch_index < epoch || (m.epoch_index == epoch && m.offset == 0)) k = std::max(k, m.id);
  }
  return k;
}

Verdict error_verdict(std::string reason) {
  Verdict v;
  v.outcome = Outcome::harness_error;
  v.reason = std::move(reason);
  return v;
}

}  // namespace

Verdict check(const DiskImage& crash_image, const DiskImage& oracle, const PersistedSet& persisted,
              const History& history, const fs::FsTarget& target) {
  return check_against(crash_image, view_of(oracle, target), persisted, history, target);
}

std::vector<CrashVerdict> run_workload(const ace::Workload& w, const fs::FsTarget& target,
                                       const RunOptions& options) {
  Profile p = profile(w, target);
  if (p.error) return {{"", error_verdict(*p.error)}};
  const std::uint32_t n = p.checkpoint_count();
  if (n == 0) return {{"", error_verdict("workload has no persistence point")}};

  Oracles oracles(p, target);
  std::vector<CrashVerdict> out;
  for (std::uint32_t k = options.all_checkpoints ? 1 : n; k <= n; ++k) {
    auto image = blockdev::replay(p.base_image, p.io_log, blockdev::CheckpointId{k});
    out.push_back({"cp=" + std::to_string(k),
                   check_against(image, oracles.view(k), oracles.persisted(k), p.history, target)});
  }
  if (!options.subset) return out;

  auto split = blockdev::split_epochs(p.io_log);
  for (std::size_t e = 0; e < split.epochs.size(); ++e) {
    crashgen::SubsetSelector sel;
    sel.granularity = options.granularity;
    std::size_t units = crashgen::epoch_units(split.epochs[e], options.granularity).size();
    if (units > options.exhaustive_limit) {
      sel.mode = crashgen::SubsetSelector::Mode::random;
      sel.seed = options.seed * 1000003u + e;
      sel.count = options.sample_count;
    }
    std::uint32_t k = checkpoint_before_epoch(split, e);
    for (const auto& kept : crashgen::enumerate_target_subsets(split.epochs, e, sel)) {
      auto state = crashgen::build_subset_state(p.base_image, split.epochs, e, kept, options.granularity);
      out.push_back({"cp=" + std::to_string(k) + ";" + state.subset->to_string(),
                     check_relaxed(state.image, k, oracles, p, target)});
    }
  }
  return out;
}

CrashVerdict replay_crash(const ace::Workload& w, const fs::FsTarget& target, const std::string& descriptor) {
  if (descriptor.rfind("cp=", 0) != 0) throw std::invalid_argument("bad crash descriptor: " + descriptor);
  auto semi = descriptor.find(';');
  std::uint32_t k = static_cast<std::uint32_t>(std::stoul(descriptor.substr(3, semi - 3)));
  Profile p = profile(w, target);
  if (p.error) return {descriptor, error_verdict(*p.error)};
  if (k > p.checkpoint_count() || (semi == std::string::npos && k == 0)) {
    return {descriptor, error_verdict("checkpoint " + std::to_string(k) + " does not exist")};
  }
  Oracles oracles(p, target);
  if (semi == std::string::npos) {
    auto image = blockdev::replay(p.base_image, p.io_log, blockdev::CheckpointId{k});
    return {descriptor, check_against(image, oracles.view(k), oracles.persisted(k), p.history, target)};
  }
  auto sub = crashgen::SubsetDescriptor::parse(descriptor.substr(semi + 1));
  auto split = blockdev::split_epochs(p.io_log);
  auto state = crashgen::build_subset_state(p.base_image, split.epochs, sub.prefix_count, sub.kept, sub.granularity);
  return {descriptor, check_relaxed(state.image, k, oracles, p, target)};
}

std::string format_verdict(const Verdict& v) {
  std::ostringstream out;
  out << outcome_name(v.outcome);
  if (v.outcome == Outcome::harness_error) out << ": " << v.reason;
  out << "\n";
  for (const auto& d : v.diff) {
    out << "  " << diff_kind_name(d.kind) << " " << d.path << "\n    expected: " << d.expected
        << "\n    actual:   " << d.actual << "\n";
  }
  if (v.fsck) {
    out << "  fsck: " << (v.fsck->consistent ? "consistent" : "inconsistent")
        << (v.fsck->repairable ? ", repairable" : ", not repairable") << "\n";
    for (const auto& pr : v.fsck->problems) out << "    " << pr << "\n";
  }
  return out.str();
}

}  // namespace crashsim::harness
