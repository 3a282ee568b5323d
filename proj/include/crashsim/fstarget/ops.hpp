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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crashsim::fs {

// The 14 core kinds come first, in generator order; persistence kinds follow.
enum class FsOpKind {
  creat,
  mkdir,
  falloc,
  write,
  dwrite,
  mwrite,
  link,
  symlink,
  rename,
  unlink,
  remove,
  rmdir,
  truncate,
  xattr,
  fsync,
  fdatasync,
  sync,
  msync,
};

inline constexpr int kCoreOpCount = 14;

bool is_core(FsOpKind kind);
bool is_persistence(FsOpKind kind);
// Skeleton spelling ("xattr" for both setxattr and removexattr).
std::string_view kind_name(FsOpKind kind);
std::optional<FsOpKind> kind_from_name(std::string_view name);
std::vector<FsOpKind> core_kinds();

enum class FallocMode {
  none,
  keep_size,
  zero_range,
  zero_range_keep_size,
  punch_hole_keep_size,
};

std::vector<FallocMode> all_falloc_modes();
bool keeps_size(FallocMode mode);

enum class XattrAction { set, remove };

// End-exclusive byte range.
struct ByteRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  std::uint64_t length() const { return end - begin; }
  bool operator==(const ByteRange&) const = default;
};

// One parameterized operation. Field use by kind:
//   link/rename: path -> path2; symlink: path is the target, path2 the link
//   write/dwrite/mwrite/falloc: range; msync: optional range
//   truncate: size; xattr: action, xattr_name, xattr_value
struct FsOp {
  FsOpKind kind = FsOpKind::sync;
  std::string path;
  std::string path2;
  std::optional<ByteRange> range;
  std::uint64_t size = 0;
  FallocMode falloc = FallocMode::none;
  XattrAction xattr_action = XattrAction::set;
  std::string xattr_name;
  std::string xattr_value;

  bool operator==(const FsOp&) const = default;
};

enum class FsError {
  ok,
  enoent,
  eexist,
  eisdir,
  enotdir,
  enotempty,
  einval,
  eperm,
  enodata,
  enospc,
  eio,  // a directory entry points at a missing inode
};

std::string_view error_name(FsError e);

// Content written by data ops: a function of the op's seed and the absolute
// file offset. Never zero, so holes and lost writes are distinguishable.
std::uint8_t pattern_byte(std::uint32_t seed, std::uint64_t offset);
void fill_pattern(std::uint32_t seed, std::uint64_t offset, std::span<std::uint8_t> out);

// Path helpers. Paths are relative ("A/foo"); the root is "/".
inline constexpr std::string_view kRoot = "/";
std::string parent_path(std::string_view path);
std::string base_name(std::string_view path);
std::string join_path(std::string_view dir, std::string_view name);
std::vector<std::string> split_path(std::string_view path);
// True when `path` equals `ancestor` or lies beneath it.
bool path_within(std::string_view path, std::string_view ancestor);

}  // namespace crashsim::fs
