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

#include "crashsim/ace/generator.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "crashsim/ace/model.hpp"
#include "crashsim/util/hash.hpp"

namespace crashsim::ace {

using fs::FsOp;
using fs::FsOpKind;

namespace {

const std::vector<std::string> kXattrNames = {"user.a", "user.b"};
constexpr std::string_view kPrologueXattrValue = "0";
constexpr std::string_view kBodyXattrValue = "1";

bool is_data_kind(FsOpKind k) {
  return k == FsOpKind::write || k == FsOpKind::dwrite || k == FsOpKind::mwrite ||
         k == FsOpKind::falloc || k == FsOpKind::truncate;
}

// Paths an op names, in argument order. The symlink target is a name too.
std::vector<std::string> named_paths(const ParamOp& op) {
  std::vector<std::string> out{op.path};
  if (!op.path2.empty()) out.push_back(op.path2);
  return out;
}

// Paths that must exist or be created; excludes the symlink target string.
std::vector<std::string> fs_paths(const ParamOp& op) {
  if (op.kind == FsOpKind::symlink) return {op.path2};
  return named_paths(op);
}

FsOp concretize(const ParamOp& p, const NsModel& model) {
  FsOp op;
  op.kind = p.kind;
  op.path = p.path;
  op.path2 = p.path2;
  std::uint64_t size = 0;
  if (const auto* n = model.find(p.path)) size = n->size;
  switch (p.kind) {
    case FsOpKind::write:
    case FsOpKind::dwrite:
    case FsOpKind::mwrite:
      op.range = write_range(p.write_class, size);
      break;
    case FsOpKind::falloc:
      op.range = write_range(p.write_class, size);
      op.falloc = p.falloc;
      break;
    case FsOpKind::truncate: op.size = truncate_size(p.truncate_class, size); break;
    case FsOpKind::xattr:
      op.xattr_action = p.xattr_action;
      op.xattr_name = p.xattr_name;
      if (p.xattr_action == fs::XattrAction::set) op.xattr_value = kBodyXattrValue;
      break;
    default: break;
  }
  return op;
}

struct Resolved {
  bool duplicate = false;  // a data op collapsed onto an earlier size class
  std::vector<FsOp> prologue;
  std::vector<FsOp> ops;
  std::vector<std::set<std::string>> exists_after;  // per op, over candidate targets
};

// Phase 4 over the core ops. Missing directories, files and xattrs that the
// body has not itself touched yet are created up front; anything else that
// fails makes the sequence unsatisfiable.
// Sizes decide concrete ranges, so two classes can yield the same op (every
// overwrite of an empty file is [0, 4K)). With `classes` set, such sequences
// are flagged unless each op uses the first class producing its range.
bool collapses(const ParamOp& p, std::uint64_t size, const std::vector<WriteClass>* classes) {
  if (!classes) return false;
  if (p.kind == FsOpKind::truncate) {
    for (auto c : all_truncate_classes()) {
      if (c == p.truncate_class) return false;
      if (truncate_size(c, size) == truncate_size(p.truncate_class, size)) return true;
    }
    return false;
  }
  if (!is_data_kind(p.kind)) return false;
  for (auto c : *classes) {
    if (c == p.write_class) return false;
    if (p.kind == FsOpKind::mwrite && c == WriteClass::append) continue;
    if (write_range(c, size) == write_range(p.write_class, size)) return true;
  }
  return false;
}

std::variant<Resolved, Rejection> resolve_core(const ParamSeq& seq, const std::vector<std::string>& watch,
                                              const std::vector<WriteClass>* classes = nullptr) {
  std::set<std::string> need_dirs, need_files;
  std::set<std::pair<std::string, std::string>> need_xattrs;
  std::set<std::string> data_files;
  for (const auto& op : seq) {
    if (is_data_kind(op.kind)) data_files.insert(op.path);
  }

  for (std::size_t attempt = 0; attempt < 4 * seq.size() + 8; ++attempt) {
    Resolved r;
    // Directories shallow first so parents precede children.
    std::vector<std::string> dirs(need_dirs.begin(), need_dirs.end());
    std::stable_sort(dirs.begin(), dirs.end(), [](const auto& a, const auto& b) {
      return fs::split_path(a).size() < fs::split_path(b).size();
    });
    for (const auto& d : dirs) r.prologue.push_back(FsOp{FsOpKind::mkdir, d});
    for (const auto& f : need_files) r.prologue.push_back(FsOp{FsOpKind::creat, f});
    for (const auto& f : need_files) {
      if (!data_files.count(f)) continue;
      FsOp w{FsOpKind::write, f};
      w.range = fs::ByteRange{0, kInitialFileSize};
      r.prologue.push_back(w);
    }
    for (const auto& [path, name] : need_xattrs) {
      FsOp x{FsOpKind::xattr, path};
      x.xattr_name = name;
      x.xattr_value = kPrologueXattrValue;
      r.prologue.push_back(x);
    }
    if (!r.prologue.empty()) r.prologue.push_back(FsOp{FsOpKind::sync});

    NsModel model;
    for (const auto& op : r.prologue) {
      if (model.apply(op) != fs::FsError::ok) {
        return Rejection{"prologue conflict at " + serialize_op(op)};
      }
    }

    bool restart = false;
    for (std::size_t j = 0; j < seq.size() && !restart; ++j) {
      FsOp op = concretize(seq[j], model);
      if (const auto* n = model.find(seq[j].path); collapses(seq[j], n ? n->size : 0, classes)) {
        r.duplicate = true;
      }
      auto err = model.apply(op);
      if (err == fs::FsError::ok) {
        r.ops.push_back(op);
        std::set<std::string> present;
        for (const auto& t : watch) {
          if (model.exists(t)) present.insert(t);
        }
        r.exists_after.push_back(std::move(present));
        continue;
      }
      // Was the state of `p` already decided by an earlier body op?
      auto touched = [&](const std::string& p) {
        for (std::size_t i = 0; i < j; ++i) {
          for (const auto& q : named_paths(seq[i])) {
            if (fs::path_within(p, q) || fs::path_within(q, p)) return true;
          }
        }
        return false;
      };
      std::string reason = serialize_op(op) + ": " + std::string(fs::error_name(err));
      bool added = false;
      bool blocked = false;
      for (const auto& p : fs_paths(seq[j])) {
        if (p == fs::kRoot) continue;
        std::string dir = fs::parent_path(p);
        std::vector<std::string> chain;
        for (; dir != fs::kRoot; dir = fs::parent_path(dir)) chain.push_back(dir);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
          if (model.exists(*it)) continue;
          if (touched(*it) || need_dirs.count(*it)) blocked = true;
          else added |= need_dirs.insert(*it).second;
        }
      }
      bool must_exist = seq[j].kind != FsOpKind::creat && seq[j].kind != FsOpKind::mkdir &&
                        seq[j].kind != FsOpKind::symlink;
      if (!added && !blocked && must_exist && err == fs::FsError::enoent) {
        const std::string& p = seq[j].path;
        if (touched(p) || need_files.count(p)) blocked = true;
        else if (seq[j].dir_operand) added = need_dirs.insert(p).second;
        else added = need_files.insert(p).second;
      }
      if (!added && !blocked && err == fs::FsError::enodata) {
        bool xattr_touched = false;
        for (std::size_t i = 0; i < j; ++i) {
          if (seq[i].kind == FsOpKind::xattr && seq[i].path == seq[j].path) xattr_touched = true;
        }
        if (!xattr_touched && !touched(seq[j].path)) {
          added = need_xattrs.insert({seq[j].path, seq[j].xattr_name}).second;
        }
      }
      if (!added) return Rejection{reason};
      restart = true;
    }
    if (!restart) return r;
  }
  return Rejection{"dependency resolution did not converge"};
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) throw std::overflow_error("workload space exceeds 64 bits");
  return a * b;
}

}  // namespace

std::vector<WriteClass> all_write_classes() {
  return {WriteClass::overwrite_start, WriteClass::overwrite_middle, WriteClass::overwrite_end,
          WriteClass::append};
}

std::string_view write_class_name(WriteClass c) {
  switch (c) {
    case WriteClass::overwrite_start: return "overwrite_start";
    case WriteClass::overwrite_middle: return "overwrite_middle";
    case WriteClass::overwrite_end: return "overwrite_end";
    case WriteClass::append: return "append";
  }
  return "?";
}

fs::ByteRange write_range(WriteClass c, std::uint64_t size) {
  switch (c) {
    case WriteClass::overwrite_start: return {0, kDataUnit};
    case WriteClass::overwrite_middle: {
      std::uint64_t mid = size / 2 / kDataUnit * kDataUnit;
      return {mid, mid + kDataUnit};
    }
    case WriteClass::overwrite_end: {
      std::uint64_t end = std::max(size, kDataUnit);
      return {end - kDataUnit, end};
    }
    case WriteClass::append: return {size, size + kDataUnit};
  }
  return {0, kDataUnit};
}

std::vector<TruncateClass> all_truncate_classes() {
  return {TruncateClass::zero, TruncateClass::shrink, TruncateClass::grow};
}

std::uint64_t truncate_size(TruncateClass c, std::uint64_t size) {
  switch (c) {
    case TruncateClass::zero: return 0;
    case TruncateClass::shrink: return size > 2048 ? size - 2048 : 0;  // leaves a partial block
    case TruncateClass::grow: return size + kDataUnit;
  }
  return 0;
}

std::vector<std::string> FileSet::files() const {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(n);
  for (const auto& d : dirs) {
    for (const auto& n : names) out.push_back(fs::join_path(d, n));
  }
  return out;
}

std::vector<std::string> FileSet::targets() const {
  if (names.empty() && dirs.empty()) return {};
  std::vector<std::string> out{std::string(fs::kRoot)};
  out.insert(out.end(), dirs.begin(), dirs.end());
  auto f = files();
  out.insert(out.end(), f.begin(), f.end());
  return out;
}

FileSet FileSet::nested(int depth) {
  static const std::vector<std::string> kDirNames = {"A", "C", "D", "E", "F", "G", "H"};
  if (depth < 0 || depth > static_cast<int>(kDirNames.size())) {
    throw std::invalid_argument("nested depth out of range");
  }
  FileSet s;
  s.names = {"foo", "bar"};
  std::string cur(fs::kRoot);
  for (int i = 0; i < depth; ++i) {
    cur = fs::join_path(cur, kDirNames[i]);
    s.dirs.push_back(cur);
  }
  return s;
}

std::string Bounds::hash() const {
  std::string canon = "seq=" + std::to_string(seq_length) + ";ops=";
  for (auto k : allowed_ops) canon += std::string(fs::kind_name(k)) + ",";
  auto fsn = files();
  canon += ";dirs=";
  for (const auto& d : fsn.dirs) canon += d + ",";
  canon += ";names=";
  for (const auto& n : fsn.names) canon += n + ",";
  canon += ";classes=";
  for (auto c : write_classes) canon += std::string(write_class_name(c)) + ",";
  return to_hex(sha256(canon)).substr(0, 16);
}

void GenStats::merge(const GenStats& o) {
  indices += o.indices;
  emitted += o.emitted;
  pruned += o.pruned;
  gaps += o.gaps;
  rejected += o.rejected;
  for (const auto& [k, v] : o.reasons) reasons[k] += v;
}

std::vector<Skeleton> gen_skeletons(const Bounds& bounds) {
  if (bounds.allowed_ops.empty()) throw std::invalid_argument("allowed_ops is empty");
  if (bounds.seq_length < 1) throw std::invalid_argument("seq_length must be positive");
  auto ops = bounds.allowed_ops;
  std::sort(ops.begin(), ops.end());
  ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
  for (auto k : ops) {
    if (!fs::is_core(k)) throw std::invalid_argument("not a core op: " + std::string(fs::kind_name(k)));
  }
  std::vector<Skeleton> out;
  std::vector<std::size_t> digits(bounds.seq_length, 0);
  while (true) {
    Skeleton s;
    for (auto d : digits) s.ops.push_back(ops[d]);
    out.push_back(std::move(s));
    int i = bounds.seq_length - 1;
    while (i >= 0 && ++digits[i] == ops.size()) digits[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

std::vector<ParamOp> param_options(FsOpKind kind, const Bounds& bounds) {
  const FileSet fset = bounds.files();
  const auto files = fset.files();
  std::vector<ParamOp> out;
  auto base = [&](std::string p, std::string p2 = "") {
    ParamOp op;
    op.kind = kind;
    op.path = std::move(p);
    op.path2 = std::move(p2);
    return op;
  };
  auto dir_op = [&](std::string p, std::string p2 = "") {
    auto op = base(std::move(p), std::move(p2));
    op.dir_operand = true;
    return op;
  };
  auto pairs = [&](const std::vector<std::string>& set, bool dirs) {
    for (const auto& a : set) {
      for (const auto& b : set) {
        if (a != b) out.push_back(dirs ? dir_op(a, b) : base(a, b));
      }
    }
  };
  switch (kind) {
    case FsOpKind::creat:
    case FsOpKind::unlink:
      for (const auto& f : files) out.push_back(base(f));
      break;
    case FsOpKind::mkdir:
    case FsOpKind::rmdir:
      for (const auto& d : fset.dirs) out.push_back(dir_op(d));
      break;
    case FsOpKind::remove:
      for (const auto& f : files) out.push_back(base(f));
      for (const auto& d : fset.dirs) out.push_back(dir_op(d));
      break;
    case FsOpKind::write:
    case FsOpKind::dwrite:
    case FsOpKind::mwrite:
      for (const auto& f : files) {
        for (auto c : bounds.write_classes) {
          // Memory-mapped writes cannot extend the file.
          if (kind == FsOpKind::mwrite && c == WriteClass::append) continue;
          auto op = base(f);
          op.write_class = c;
          out.push_back(op);
        }
      }
      break;
    case FsOpKind::falloc:
      for (const auto& f : files) {
        for (auto m : fs::all_falloc_modes()) {
          for (auto c : bounds.write_classes) {
            auto op = base(f);
            op.falloc = m;
            op.write_class = c;
            out.push_back(op);
          }
        }
      }
      break;
    case FsOpKind::link:
    case FsOpKind::symlink:
      pairs(files, false);
      break;
    case FsOpKind::rename:
      pairs(files, false);
      pairs(fset.dirs, true);
      break;
    case FsOpKind::truncate:
      for (const auto& f : files) {
        for (auto c : all_truncate_classes()) {
          auto op = base(f);
          op.truncate_class = c;
          out.push_back(op);
        }
      }
      break;
    case FsOpKind::xattr:
      for (const auto& f : files) {
        for (auto a : {fs::XattrAction::set, fs::XattrAction::remove}) {
          for (const auto& n : kXattrNames) {
            auto op = base(f);
            op.xattr_action = a;
            op.xattr_name = n;
            out.push_back(op);
          }
        }
      }
      break;
    default: throw std::invalid_argument("not a core op: " + std::string(fs::kind_name(kind)));
  }
  return out;
}

bool is_canonical(const ParamSeq& seq, const FileSet& files) {
  std::set<std::string> dirs(files.dirs.begin(), files.dirs.end());
  std::map<std::string, std::size_t> used;  // dir -> distinct names seen
  std::set<std::string> seen;
  for (const auto& op : seq) {
    for (const auto& p : named_paths(op)) {
      if (p == fs::kRoot || dirs.count(p) || seen.count(p)) continue;
      auto it = std::find(files.names.begin(), files.names.end(), fs::base_name(p));
      if (it == files.names.end()) continue;
      auto idx = static_cast<std::size_t>(it - files.names.begin());
      auto& n = used[fs::parent_path(p)];
      if (idx != n) return false;
      ++n;
      seen.insert(p);
    }
  }
  return true;
}

ParamSeq rename_files(const ParamSeq& seq,
                      const std::map<std::string, std::map<std::string, std::string>>& perm) {
  auto map_path = [&](const std::string& p) {
    if (p.empty() || p == fs::kRoot) return p;
    auto d = perm.find(fs::parent_path(p));
    if (d == perm.end()) return p;
    auto n = d->second.find(fs::base_name(p));
    return n == d->second.end() ? p : fs::join_path(fs::parent_path(p), n->second);
  };
  ParamSeq out = seq;
  for (auto& op : out) {
    op.path = map_path(op.path);
    op.path2 = map_path(op.path2);
  }
  return out;
}

std::vector<ParamSeq> expand_params(const Skeleton& skeleton, const Bounds& bounds) {
  const FileSet fset = bounds.files();
  std::vector<std::vector<ParamOp>> choices;
  for (auto k : skeleton.ops) choices.push_back(param_options(k, bounds));
  std::vector<ParamSeq> out;
  for (const auto& c : choices) {
    if (c.empty()) return out;
  }
  std::vector<std::size_t> digits(choices.size(), 0);
  while (true) {
    ParamSeq seq;
    for (std::size_t i = 0; i < digits.size(); ++i) seq.push_back(choices[i][digits[i]]);
    if (is_canonical(seq, fset)) out.push_back(std::move(seq));
    int i = static_cast<int>(digits.size()) - 1;
    while (i >= 0 && ++digits[i] == choices[i].size()) digits[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

std::vector<std::string> persistence_targets(const ParamSeq& seq, const FileSet& files) {
  std::set<std::string> want;
  for (const auto& op : seq) {
    for (const auto& p : fs_paths(op)) {
      want.insert(p);
      want.insert(fs::parent_path(p));
    }
  }
  std::vector<std::string> out;
  for (const auto& t : files.targets()) {
    if (want.count(t)) out.push_back(t);
  }
  return out;
}

std::vector<Body> add_persistence_points(const ParamSeq& seq, const Bounds& bounds) {
  if (seq.empty()) return {};
  auto targets = persistence_targets(seq, bounds.files());
  // Slot options in generator digit order.
  auto slot_options = [&](bool final_slot) {
    std::vector<std::optional<FsOp>> opts;
    if (!final_slot) opts.push_back(std::nullopt);
    opts.push_back(FsOp{FsOpKind::sync});
    for (const auto& t : targets) opts.push_back(FsOp{FsOpKind::fsync, t});
    for (const auto& t : targets) opts.push_back(FsOp{FsOpKind::fdatasync, t});
    return opts;
  };
  std::vector<std::vector<std::optional<FsOp>>> slots;
  for (std::size_t i = 0; i < seq.size(); ++i) slots.push_back(slot_options(i + 1 == seq.size()));
  std::vector<Body> out;
  std::vector<std::size_t> digits(seq.size(), 0);
  while (true) {
    Body b{seq, {}};
    for (std::size_t i = 0; i < digits.size(); ++i) b.persist.push_back(slots[i][digits[i]]);
    out.push_back(std::move(b));
    int i = static_cast<int>(digits.size()) - 1;
    while (i >= 0 && ++digits[i] == slots[i].size()) digits[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

namespace {

std::variant<Workload, Rejection> assemble(const Resolved& r, const ParamSeq& seq,
                                           const std::vector<std::optional<FsOp>>& persist) {
  Workload w;
  w.prologue = r.prologue;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    w.body.push_back(r.ops[j]);
    if (!persist[j]) continue;
    const FsOp& p = *persist[j];
    if (p.kind != FsOpKind::sync && !r.exists_after[j].count(p.path)) {
      return Rejection{std::string(fs::kind_name(p.kind)) + " target missing"};
    }
    w.body.push_back(p);
  }
  w.skeleton = skeleton_of(w.body);
  return w;
}

std::vector<std::string> watch_list(const std::vector<std::optional<FsOp>>& persist) {
  std::vector<std::string> out;
  for (const auto& p : persist) {
    if (p && p->kind != FsOpKind::sync) out.push_back(p->path);
  }
  return out;
}

}  // namespace

std::variant<Workload, Rejection> resolve_dependencies(const Body& body) {
  if (body.ops.size() != body.persist.size()) throw std::invalid_argument("persist slots mismatch");
  auto r = resolve_core(body.ops, watch_list(body.persist));
  if (auto* rej = std::get_if<Rejection>(&r)) return *rej;
  return assemble(std::get<Resolved>(r), body.ops, body.persist);
}

Generator::Generator(Bounds bounds) : bounds_(std::move(bounds)), files_(bounds_.files()) {
  universe_ = files_.targets();
  auto skels = gen_skeletons(bounds_);
  for (const auto& s : skels) {
    for (auto k : s.ops) {
      if (!options_.count(k)) options_[k] = param_options(k, bounds_);
    }
  }
  const std::uint64_t u = universe_.size();
  prefix_.push_back(0);
  for (auto& s : skels) {
    SkeletonInfo info;
    info.skeleton = s;
    for (std::size_t j = 0; j < s.ops.size(); ++j) {
      std::uint64_t r = options_.at(s.ops[j]).size();
      info.param_radix.push_back(r);
      info.param_count = checked_mul(info.param_count, r);
      bool final_slot = j + 1 == s.ops.size();
      info.persist_count = checked_mul(info.persist_count, (final_slot ? 1 : 2) + 2 * u);
    }
    std::uint64_t block = checked_mul(info.param_count, info.persist_count);
    if (prefix_.back() > UINT64_MAX - block) throw std::overflow_error("workload space exceeds 64 bits");
    prefix_.push_back(prefix_.back() + block);
    skeletons_.push_back(std::move(info));
  }
}

namespace {

// Decodes a persistence digit into an op over the target universe.
std::optional<FsOp> decode_slot(std::uint64_t d, bool final_slot, const std::vector<std::string>& universe) {
  if (!final_slot) {
    if (d == 0) return std::nullopt;
    --d;
  }
  if (d == 0) return FsOp{FsOpKind::sync};
  --d;
  if (d < universe.size()) return FsOp{FsOpKind::fsync, universe[d]};
  return FsOp{FsOpKind::fdatasync, universe[d - universe.size()]};
}

}  // namespace

GenStats Generator::for_each(std::uint64_t lo, std::uint64_t hi,
                             const std::function<void(std::uint64_t, const Workload&)>& fn) const {
  GenStats st;
  hi = std::min(hi, size());
  if (lo >= hi) return st;
  std::size_t s = std::upper_bound(prefix_.begin(), prefix_.end(), lo) - prefix_.begin() - 1;
  for (; s < skeletons_.size() && prefix_[s] < hi; ++s) {
    const auto& info = skeletons_[s];
    const std::uint64_t base = prefix_[s];
    const std::uint64_t Q = info.persist_count;
    std::uint64_t from = std::max(lo, base) - base, to = std::min(hi, prefix_[s + 1]) - base;
    const std::size_t n = info.skeleton.ops.size();
    for (std::uint64_t pi = from / Q; pi * Q < to; ++pi) {
      std::uint64_t q_lo = pi * Q < from ? from - pi * Q : 0;
      std::uint64_t q_hi = std::min(Q, to - pi * Q);
      std::uint64_t span = q_hi - q_lo;
      st.indices += span;

      ParamSeq seq(n);
      std::uint64_t rest = pi;
      for (std::size_t j = n; j-- > 0;) {
        seq[j] = options_.at(info.skeleton.ops[j])[rest % info.param_radix[j]];
        rest /= info.param_radix[j];
      }
      if (!is_canonical(seq, files_)) {
        st.pruned += span;
        continue;
      }
      auto targets = persistence_targets(seq, files_);
      auto r = resolve_core(seq, targets, &bounds_.write_classes);
      if (auto* rej = std::get_if<Rejection>(&r)) {
        st.rejected += span;
        st.reasons[rej->reason] += span;
        continue;
      }
      const auto& res = std::get<Resolved>(r);
      if (res.duplicate) {
        st.pruned += span;
        continue;
      }
      std::set<std::string> allowed(targets.begin(), targets.end());
      for (std::uint64_t q = q_lo; q < q_hi; ++q) {
        std::vector<std::optional<FsOp>> persist(n);
        std::uint64_t qr = q;
        bool gap = false;
        for (std::size_t j = n; j-- > 0;) {
          bool final_slot = j + 1 == n;
          std::uint64_t radix = (final_slot ? 1 : 2) + 2 * universe_.size();
          persist[j] = decode_slot(qr % radix, final_slot, universe_);
          qr /= radix;
          if (persist[j] && persist[j]->kind != FsOpKind::sync && !allowed.count(persist[j]->path)) gap = true;
        }
        if (gap) {
          // Targets outside the referenced set are not phase-3 choices.
          ++st.gaps;
          continue;
        }
        auto w = assemble(res, seq, persist);
        if (auto* rej = std::get_if<Rejection>(&w)) {
          ++st.rejected;
          ++st.reasons[rej->reason];
          continue;
        }
        ++st.emitted;
        fn(base + pi * Q + q, std::get<Workload>(w));
      }
    }
  }
  return st;
}

Generator::Item Generator::at(std::uint64_t index) const {
  if (index >= size()) throw std::out_of_range("workload index out of range");
  Item item;
  GenStats st = for_each(index, index + 1, [&](std::uint64_t, const Workload& w) { item.workload = w; });
  item.pruned = st.pruned > 0;
  if (!st.reasons.empty()) item.reason = st.reasons.begin()->first;
  return item;
}

}  // namespace crashsim::ace
