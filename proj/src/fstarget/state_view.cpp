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

#include "crashsim/fstarget/state_view.hpp"

namespace crashsim::fs {

std::string_view kind_name(EntryKind kind) {
  switch (kind) {
    case EntryKind::file: return "file";
    case EntryKind::dir: return "dir";
    case EntryKind::symlink: return "symlink";
  }
  return "?";
}

std::string describe(const EntryView& e) {
  std::string out(kind_name(e.kind));
  out += " size=" + std::to_string(e.size) + " links=" + std::to_string(e.link_count) +
         " sectors=" + std::to_string(e.block_count) + " data=" + to_hex(e.data_hash).substr(0, 12);
  for (const auto& [k, v] : e.xattrs) out += " " + k + "=" + v;
  return out;
}

}  // namespace crashsim::fs
