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

#include "crashsim/fstarget/ops.hpp"

#include <array>

namespace crashsim::fs {
namespace {

constexpr std::array<std::string_view, 18> kNames = {
    "creat",  "mkdir",  "falloc", "write", "dwrite",   "mwrite",    "link", "symlink", "rename",
    "unlink", "remove", "rmdir",  "truncate", "xattr", "fsync", "fdatasync", "sync", "msync",
};

}  // namespace

bool is_core(FsOpKind kind) { return static_cast<int>(kind) < kCoreOpCount; }

bool is_persistence(FsOpKind kind) { return !is_core(kind); }

std::string_view kind_name(FsOpKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<FsOpKind> kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<FsOpKind>(i);
  }
  return std::nullopt;
}

std::vector<FsOpKind> core_kinds() {
  std::vector<FsOpKind> out;
  for (int i = 0; i < kCoreOpCount; ++i) out.push_back(static_cast<FsOpKind>(i));
  return out;
}

std::vector<FallocMode> all_falloc_modes() {
  return {FallocMode::none, FallocMode::keep_size, FallocMode::zero_range,
          FallocMode::zero_range_keep_size, FallocMode::punch_hole_keep_size};
}

bool keeps_size(FallocMode mode) {
  return mode == FallocMode::keep_size || mode == FallocMode::zero_range_keep_size ||
         mode == FallocMode::punch_hole_keep_size;
}

std::string_view error_name(FsError e) {
  switch (e) {
    case FsError::ok: return "ok";
    case FsError::enoent: return "ENOENT";
    case FsError::eexist: return "EEXIST";
    case FsError::eisdir: return "EISDIR";
    case FsError::enotdir: return "ENOTDIR";
    case FsError::enotempty: return "ENOTEMPTY";
    case FsError::einval: return "EINVAL";
    case FsError::eperm: return "EPERM";
    case FsError::enodata: return "ENODATA";
    case FsError::enospc: return "ENOSPC";
    case FsError::eio: return "EIO";
  }
  return "?";
}

std::uint8_t pattern_byte(std::uint32_t seed, std::uint64_t offset) {
  std::uint64_t x = offset * 7 + std::uint64_t{seed} * 53 + (offset >> 9) * 13;
  return static_cast<std::uint8_t>(x % 251 + 1);
}

void fill_pattern(std::uint32_t seed, std::uint64_t offset, std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pattern_byte(seed, offset + i);
}

std::string parent_path(std::string_view path) {
  auto slash = path.rfind('/');
  if (slash == std::string_view::npos || path == kRoot) return std::string(kRoot);
  return std::string(path.substr(0, slash));
}

std::string base_name(std::string_view path) {
  auto slash = path.rfind('/');
  if (slash == std::string_view::npos) return std::string(path);
  return std::string(path.substr(slash + 1));
}

std::string join_path(std::string_view dir, std::string_view name) {
  if (dir == kRoot || dir.empty()) return std::string(name);
  return std::string(dir) + "/" + std::string(name);
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  if (path == kRoot || path.empty()) return parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    if (slash == std::string_view::npos) slash = path.size();
    if (slash > start) parts.emplace_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

bool path_within(std::string_view path, std::string_view ancestor) {
  if (ancestor == kRoot) return true;
  if (path == ancestor) return true;
  return path.size() > ancestor.size() && path.substr(0, ancestor.size()) == ancestor &&
         path[ancestor.size()] == '/';
}

}  // namespace crashsim::fs
