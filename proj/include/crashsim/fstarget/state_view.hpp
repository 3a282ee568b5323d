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
#include <map>
#include <string>
#include <string_view>

#include "crashsim/util/hash.hpp"

namespace crashsim::fs {

enum class EntryKind { file, dir, symlink };

std::string_view kind_name(EntryKind kind);

// What a user-level stat + read of one path reports.
struct EntryView {
  EntryKind kind = EntryKind::file;
  std::uint64_t size = 0;
  std::uint32_t link_count = 0;
  std::uint64_t block_count = 0;  // 512-byte sectors
  Digest data_hash{};             // file contents, or the symlink target
  std::map<std::string, std::string> xattrs;
  std::uint32_t ino = 0;          // identity only; never compared across images

  bool operator==(const EntryView&) const = default;
};

// Complete logical listing of a mounted file system, keyed by path ("/" is the
// root). A directory reachable under two names is listed under both.
struct FsStateView {
  bool mountable = true;
  std::map<std::string, EntryView> entries;

  const EntryView* find(const std::string& path) const {
    auto it = entries.find(path);
    return it == entries.end() ? nullptr : &it->second;
  }
};

std::string describe(const EntryView& e);

}  // namespace crashsim::fs
