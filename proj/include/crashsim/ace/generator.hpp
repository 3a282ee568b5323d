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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crashsim/ace/workload.hpp"
#include "crashsim/fstarget/ops.hpp"

namespace crashsim::ace {

// Byte ranges for data ops, relative to the file size at execution time.
enum class WriteClass { overwrite_start, overwrite_middle, overwrite_end, append };
std::vector<WriteClass> all_write_classes();
std::string_view write_class_name(WriteClass c);
fs::ByteRange write_range(WriteClass c, std::uint64_t size);

enum class TruncateClass { zero, shrink, grow };
std::vector<TruncateClass> all_truncate_classes();
std::uint64_t truncate_size(TruncateClass c, std::uint64_t size);

inline constexpr std::uint64_t kDataUnit = 4096;
inline constexpr std::uint64_t kInitialFileSize = 16 * 1024;

// Every directory, and the root, holds one file per name.
struct FileSet {
  std::vector<std::string> dirs;   // never permuted
  std::vector<std::string> names;  // interchangeable within a directory

  std::vector<std::string> files() const;
  // Persistence target universe: root, dirs, then files.
  std::vector<std::string> targets() const;
  // A chain of `depth` nested directories (A, A/C, ...) plus two names.
  static FileSet nested(int depth);
  bool operator==(const FileSet&) const = default;
};

struct Bounds {
  int seq_length = 1;
  std::vector<fs::FsOpKind> allowed_ops = fs::core_kinds();
  std::optional<FileSet> file_set;  // defaults to FileSet::nested(nested_depth)
  std::vector<WriteClass> write_classes = all_write_classes();
  int nested_depth = 2;

  FileSet files() const { return file_set ? *file_set : FileSet::nested(nested_depth); }
  std::string hash() const;
};

// A core op with symbolic arguments; sizes resolve against the model state.
struct ParamOp {
  fs::FsOpKind kind = fs::FsOpKind::creat;
  std::string path;
  std::string path2;
  WriteClass write_class = WriteClass::overwrite_start;
  TruncateClass truncate_class = TruncateClass::zero;
  fs::FallocMode falloc = fs::FallocMode::none;
  fs::XattrAction xattr_action = fs::XattrAction::set;
  std::string xattr_name;
  bool dir_operand = false;  // path names a directory of the file set

  bool operator==(const ParamOp&) const = default;
};
using ParamSeq = std::vector<ParamOp>;

// Phase-3 output: one optional persistence op after each core op.
struct Body {
  ParamSeq ops;
  std::vector<std::optional<fs::FsOp>> persist;
  bool operator==(const Body&) const = default;
};

struct Rejection {
  std::string reason;
};

std::vector<Skeleton> gen_skeletons(const Bounds& bounds);

// Unpruned argument choices for one op kind, in a fixed order.
std::vector<ParamOp> param_options(fs::FsOpKind kind, const Bounds& bounds);

// True when file names in each directory are first used in file-set order.
// Exactly one member of every symmetry class passes.
bool is_canonical(const ParamSeq& seq, const FileSet& files);

// Applies a per-directory name permutation: perm[dir][name] = new name.
ParamSeq rename_files(const ParamSeq& seq,
                      const std::map<std::string, std::map<std::string, std::string>>& perm);

std::vector<ParamSeq> expand_params(const Skeleton& skeleton, const Bounds& bounds);

// Referenced paths plus their parent directories, in target-universe order.
std::vector<std::string> persistence_targets(const ParamSeq& seq, const FileSet& files);

std::vector<Body> add_persistence_points(const ParamSeq& seq, const Bounds& bounds);

std::variant<Workload, Rejection> resolve_dependencies(const Body& body);

struct GenStats {
  std::uint64_t indices = 0;
  std::uint64_t emitted = 0;
  std::uint64_t pruned = 0;    // symmetric or size-class duplicates
  std::uint64_t gaps = 0;      // persistence target outside the referenced set
  std::uint64_t rejected = 0;  // unsatisfiable
  std::map<std::string, std::uint64_t> reasons;

  void merge(const GenStats& o);
};

// Index-addressable stream over the raw mixed-radix space
// skeleton x params x persistence. Every index either yields a workload,
// is a pruned symmetric duplicate, or is rejected.
class Generator {
 public:
  explicit Generator(Bounds bounds);

  const Bounds& bounds() const { return bounds_; }
  std::uint64_t size() const { return prefix_.back(); }

  struct Item {
    std::optional<Workload> workload;
    bool pruned = false;
    std::string reason;  // set when rejected
  };
  Item at(std::uint64_t index) const;

  // Visits every emitted workload in [lo, hi) in index order.
  GenStats for_each(std::uint64_t lo, std::uint64_t hi,
                    const std::function<void(std::uint64_t, const Workload&)>& fn) const;

 private:
  struct SkeletonInfo {
    Skeleton skeleton;
    std::vector<std::uint64_t> param_radix;
    std::uint64_t param_count = 1;
    std::uint64_t persist_count = 1;
  };

  Bounds bounds_;
  FileSet files_;
  std::vector<std::string> universe_;
  std::map<fs::FsOpKind, std::vector<ParamOp>> options_;
  std::vector<SkeletonInfo> skeletons_;
  std::vector<std::uint64_t> prefix_;  // prefix_[s] = first index of skeleton s
};

}  // namespace crashsim::ace
