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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crashsim/fstarget/ops.hpp"

namespace crashsim::ace {

// Ordered core-op kinds of a workload with arguments erased.
struct Skeleton {
  std::vector<fs::FsOpKind> ops;

  std::string to_string() const;  // "link,rename"
  static Skeleton parse(std::string_view text);
  bool operator==(const Skeleton&) const = default;
  auto operator<=>(const Skeleton& o) const { return ops <=> o.ops; }
};

// The prologue sets up dependencies; the body holds the core ops interleaved
// with persistence ops. A generated body always ends in a persistence op.
struct Workload {
  std::vector<fs::FsOp> prologue;
  std::vector<fs::FsOp> body;
  Skeleton skeleton;

  bool operator==(const Workload&) const = default;
};

Skeleton skeleton_of(const std::vector<fs::FsOp>& body);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string serialize_op(const fs::FsOp& op);
std::string serialize(const Workload& w);

// Parses one workload. Lines before a `---body---` marker form the prologue;
// without the marker everything is body. `---crash---` may close the file.
Workload parse(std::string_view text);

// `# expect <target>: <class>` header annotations.
std::map<std::string, std::string> parse_expectations(std::string_view text);

std::string format_size(std::uint64_t bytes);

}  // namespace crashsim::ace
