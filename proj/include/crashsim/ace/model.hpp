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
#include <optional>
#include <set>
#include <string>

#include "crashsim/fstarget/ops.hpp"
#include "crashsim/fstarget/state_view.hpp"

namespace crashsim::ace {

// Namespace and size model of a POSIX file system. It returns the same
// error values SoundFS does for every op, without any block IO, so the
// generator can resolve dependencies and concrete byte ranges cheaply.
class NsModel {
 public:
  struct Node {
    fs::EntryKind kind = fs::EntryKind::file;
    std::uint64_t size = 0;
    std::set<std::string> xattrs;
    std::map<std::string, int> children;  // dirs only
  };

  NsModel();

  fs::FsError apply(const fs::FsOp& op);

  // Node at path, or nullptr.
  const Node* find(const std::string& path) const;
  bool exists(const std::string& path) const { return find(path) != nullptr; }

  // Path -> (kind, size) for every non-root entry.
  std::map<std::string, std::pair<fs::EntryKind, std::uint64_t>> listing() const;

 private:
  struct Lookup {
    fs::FsError err = fs::FsError::ok;
    int parent = 0;
    std::string name;
    std::optional<int> node;
  };
  Lookup lookup(const std::string& path) const;
  int add(Node n);
  void drop(int id);

  std::map<int, Node> nodes_;
  std::map<int, int> nlink_;
  int next_ = 1;
  static constexpr int kRootId = 0;
};

}  // namespace crashsim::ace
