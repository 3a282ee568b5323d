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

#include "crashsim/ace/model.hpp"

#include <functional>

namespace crashsim::ace {

using fs::EntryKind;
using fs::FsError;
using fs::FsOp;
using fs::FsOpKind;

namespace {
constexpr std::size_t kMaxName = 55;
constexpr std::size_t kMaxSymlink = 95;
}  // namespace

NsModel::NsModel() {
  Node root;
  root.kind = EntryKind::dir;
  nodes_[kRootId] = root;
  nlink_[kRootId] = 2;
}

NsModel::Lookup NsModel::lookup(const std::string& path) const {
  Lookup out;
  if (path == fs::kRoot) {
    out.node = kRootId;
    return out;
  }
  auto parts = fs::split_path(path);
  if (parts.empty()) {
    out.err = FsError::einval;
    return out;
  }
  int cur = kRootId;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const auto& kids = nodes_.at(cur).children;
    auto it = kids.find(parts[i]);
    if (it == kids.end()) {
      out.err = FsError::enoent;
      return out;
    }
    if (nodes_.at(it->second).kind != EntryKind::dir) {
      out.err = FsError::enotdir;
      return out;
    }
    cur = it->second;
  }
  out.parent = cur;
  out.name = parts.back();
  if (out.name.empty() || out.name.size() > kMaxName || out.name == "." || out.name == "..") {
    out.err = FsError::einval;
    return out;
  }
  const auto& kids = nodes_.at(cur).children;
  if (auto it = kids.find(out.name); it != kids.end()) out.node = it->second;
  return out;
}

const NsModel::Node* NsModel::find(const std::string& path) const {
  auto l = lookup(path);
  if (l.err != FsError::ok || !l.node) return nullptr;
  return &nodes_.at(*l.node);
}

int NsModel::add(Node n) {
  int id = next_++;
  nlink_[id] = n.kind == EntryKind::dir ? 2 : 1;
  nodes_[id] = std::move(n);
  return id;
}

void NsModel::drop(int id) {
  if (nodes_.at(id).kind == EntryKind::dir || --nlink_.at(id) == 0) {
    nodes_.erase(id);
    nlink_.erase(id);
  }
}

FsError NsModel::apply(const FsOp& op) {
  auto file_target = [&](const Lookup& l) -> FsError {
    if (l.err != FsError::ok) return l.err;
    if (!l.node) return FsError::enoent;
    if (nodes_.at(*l.node).kind == EntryKind::dir) return FsError::eisdir;
    if (nodes_.at(*l.node).kind != EntryKind::file) return FsError::einval;
    return FsError::ok;
  };

  switch (op.kind) {
    case FsOpKind::creat: {
      auto l = lookup(op.path);
      if (l.err != FsError::ok) return l.err;
      if (l.node) return nodes_.at(*l.node).kind == EntryKind::dir ? FsError::eisdir : FsError::ok;
      nodes_.at(l.parent).children[l.name] = add(Node{});
      return FsError::ok;
    }
    case FsOpKind::mkdir: {
      auto l = lookup(op.path);
      if (l.err != FsError::ok) return l.err;
      if (l.node) return FsError::eexist;
      Node n;
      n.kind = EntryKind::dir;
      nodes_.at(l.parent).children[l.name] = add(n);
      return FsError::ok;
    }
    case FsOpKind::write:
    case FsOpKind::dwrite:
    case FsOpKind::mwrite:
    case FsOpKind::falloc: {
      auto l = lookup(op.path);
      if (auto e = file_target(l); e != FsError::ok) return e;
      if (!op.range || op.range->length() == 0) return FsError::einval;
      Node& n = nodes_.at(*l.node);
      if (op.kind == FsOpKind::mwrite && op.range->end > n.size) return FsError::einval;
      bool grows = op.kind == FsOpKind::write || op.kind == FsOpKind::dwrite ||
                   (op.kind == FsOpKind::falloc && !fs::keeps_size(op.falloc));
      if (grows) n.size = std::max(n.size, op.range->end);
      return FsError::ok;
    }
    case FsOpKind::link: {
      auto src = lookup(op.path);
      if (src.err != FsError::ok) return src.err;
      if (!src.node) return FsError::enoent;
      if (nodes_.at(*src.node).kind == EntryKind::dir) return FsError::eperm;
      auto dst = lookup(op.path2);
      if (dst.err != FsError::ok) return dst.err;
      if (dst.node) return FsError::eexist;
      nodes_.at(dst.parent).children[dst.name] = *src.node;
      ++nlink_.at(*src.node);
      return FsError::ok;
    }
    case FsOpKind::symlink: {
      if (op.path.empty() || op.path.size() > kMaxSymlink) return FsError::einval;
      auto dst = lookup(op.path2);
      if (dst.err != FsError::ok) return dst.err;
      if (dst.node) return FsError::eexist;
      Node n;
      n.kind = EntryKind::symlink;
      n.size = op.path.size();
      nodes_.at(dst.parent).children[dst.name] = add(n);
      return FsError::ok;
    }
    case FsOpKind::rename: {
      auto src = lookup(op.path);
      if (src.err != FsError::ok) return src.err;
      if (!src.node) return FsError::enoent;
      if (op.path == fs::kRoot) return FsError::einval;
      auto dst = lookup(op.path2);
      if (dst.err != FsError::ok) return dst.err;
      if (op.path2 == fs::kRoot) return FsError::einval;
      int id = *src.node;
      if (dst.node == id) return FsError::ok;
      bool src_dir = nodes_.at(id).kind == EntryKind::dir;
      if (dst.node) {
        const Node& d = nodes_.at(*dst.node);
        if (src_dir) {
          if (d.kind != EntryKind::dir) return FsError::enotdir;
          if (!d.children.empty()) return FsError::enotempty;
        } else if (d.kind == EntryKind::dir) {
          return FsError::eisdir;
        }
      }
      if (src_dir && fs::path_within(op.path2, op.path)) return FsError::einval;
      if (dst.node) {
        nodes_.at(dst.parent).children.erase(dst.name);
        drop(*dst.node);
      }
      nodes_.at(src.parent).children.erase(src.name);
      nodes_.at(dst.parent).children[dst.name] = id;
      return FsError::ok;
    }
    case FsOpKind::unlink:
    case FsOpKind::remove: {
      auto l = lookup(op.path);
      if (l.err != FsError::ok) return l.err;
      if (!l.node) return FsError::enoent;
      if (nodes_.at(*l.node).kind == EntryKind::dir) {
        if (op.kind == FsOpKind::unlink) return FsError::eisdir;
        if (op.path == fs::kRoot) return FsError::einval;
        if (!nodes_.at(*l.node).children.empty()) return FsError::enotempty;
      }
      nodes_.at(l.parent).children.erase(l.name);
      drop(*l.node);
      return FsError::ok;
    }
    case FsOpKind::rmdir: {
      if (op.path == fs::kRoot) return FsError::einval;
      auto l = lookup(op.path);
      if (l.err != FsError::ok) return l.err;
      if (!l.node) return FsError::enoent;
      if (nodes_.at(*l.node).kind != EntryKind::dir) return FsError::enotdir;
      if (!nodes_.at(*l.node).children.empty()) return FsError::enotempty;
      nodes_.at(l.parent).children.erase(l.name);
      drop(*l.node);
      return FsError::ok;
    }
    case FsOpKind::truncate: {
      auto l = lookup(op.path);
      if (auto e = file_target(l); e != FsError::ok) return e;
      nodes_.at(*l.node).size = op.size;
      return FsError::ok;
    }
    case FsOpKind::xattr: {
      auto l = lookup(op.path);
      if (l.err != FsError::ok) return l.err;
      if (!l.node) return FsError::enoent;
      if (op.xattr_name.empty()) return FsError::einval;
      auto& xs = nodes_.at(*l.node).xattrs;
      if (op.xattr_action == fs::XattrAction::remove) {
        return xs.erase(op.xattr_name) ? FsError::ok : FsError::enodata;
      }
      xs.insert(op.xattr_name);
      return FsError::ok;
    }
    case FsOpKind::fsync:
    case FsOpKind::fdatasync:
    case FsOpKind::msync: {
      auto l = lookup(op.path);
      if (l.err != FsError::ok) return l.err;
      return l.node ? FsError::ok : FsError::enoent;
    }
    case FsOpKind::sync: return FsError::ok;
  }
  return FsError::einval;
}

std::map<std::string, std::pair<EntryKind, std::uint64_t>> NsModel::listing() const {
  std::map<std::string, std::pair<EntryKind, std::uint64_t>> out;
  std::function<void(int, const std::string&)> walk = [&](int id, const std::string& path) {
    for (const auto& [name, child] : nodes_.at(id).children) {
      std::string p = fs::join_path(path, name);
      const Node& n = nodes_.at(child);
      out[p] = {n.kind, n.size};
      if (n.kind == EntryKind::dir) walk(child, p);
    }
  };
  walk(kRootId, std::string(fs::kRoot));
  return out;
}

}  // namespace crashsim::ace
