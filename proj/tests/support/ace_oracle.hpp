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

// Brute-force enumerator for toy generator bounds, shared by the generator
// unit tests and the acceptance runner.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "crashsim/ace/generator.hpp"

namespace crashsim::testing {

using namespace crashsim::ace;
using fs::FsOp;
using fs::FsOpKind;

// Independent enumeration of the toy space with no pruning at all.
inline std::vector<Workload> brute_force(const std::vector<FsOpKind>& ops, int max_seq) {
  const std::vector<std::string> files = {"foo", "bar"};
  auto options = [&](FsOpKind k) {
    std::vector<ParamOp> out;
    for (const auto& a : files) {
      if (k == FsOpKind::link || k == FsOpKind::rename || k == FsOpKind::symlink) {
        for (const auto& b : files) {
          if (a != b) out.push_back(ParamOp{k, a, b});
        }
      } else if (k == FsOpKind::write) {
        for (auto c : all_write_classes()) {
          ParamOp op{k, a};
          op.write_class = c;
          out.push_back(op);
        }
      } else {
        out.push_back(ParamOp{k, a});
      }
    }
    return out;
  };
  std::vector<Workload> out;
  std::vector<ParamSeq> seqs{{}};
  for (int len = 1; len <= max_seq; ++len) {
    std::vector<ParamSeq> next;
    for (const auto& s : seqs) {
      for (auto k : ops) {
        for (const auto& o : options(k)) {
          auto t = s;
          t.push_back(o);
          next.push_back(t);
        }
      }
    }
    seqs = next;
    for (const auto& s : seqs) {
      std::set<std::string> named;
      for (const auto& op : s) {
        named.insert(op.path);
        if (!op.path2.empty()) named.insert(op.path2);
      }
      std::vector<std::string> targets{"/"};
      for (const auto& f : files) {
        if (named.count(f)) targets.push_back(f);
      }
      std::vector<std::optional<FsOp>> choices{std::nullopt, FsOp{FsOpKind::sync}};
      for (const auto& t : targets) choices.push_back(FsOp{FsOpKind::fsync, t});
      for (const auto& t : targets) choices.push_back(FsOp{FsOpKind::fdatasync, t});
      std::vector<std::vector<std::optional<FsOp>>> persists{{}};
      for (int i = 0; i < len; ++i) {
        std::vector<std::vector<std::optional<FsOp>>> grown;
        for (const auto& p : persists) {
          for (const auto& c : choices) {
            if (i + 1 == len && !c) continue;
            auto q = p;
            q.push_back(c);
            grown.push_back(q);
          }
        }
        persists = grown;
      }
      for (const auto& p : persists) {
        auto r = resolve_dependencies(Body{s, p});
        if (auto* w = std::get_if<Workload>(&r)) out.push_back(*w);
      }
    }
  }
  return out;
}

// Symmetry class key: swap foo and bar, prologue order ignored.
inline std::string orbit_key(const Workload& w) {
  auto norm = [](const Workload& x) {
    std::vector<std::string> pro;
    for (const auto& op : x.prologue) pro.push_back(serialize_op(op));
    std::sort(pro.begin(), pro.end());
    std::string out;
    for (const auto& l : pro) out += l + "\n";
    out += "|";
    for (const auto& op : x.body) out += serialize_op(op) + "\n";
    return out;
  };
  auto swap = [](std::string s) {
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
      if (s.compare(i, 3, "foo") == 0) out += "bar", i += 3;
      else if (s.compare(i, 3, "bar") == 0) out += "foo", i += 3;
      else out += s[i++];
    }
    return out;
  };
  auto a = norm(w);
  // Re-sort the swapped prologue for an order-free comparison.
  auto swapped = swap(a);
  auto bar = swapped.find('|');
  std::vector<std::string> pro;
  std::string head = swapped.substr(0, bar);
  for (std::size_t i = 0; i < head.size();) {
    auto nl = head.find('\n', i);
    pro.push_back(head.substr(i, nl - i));
    i = nl + 1;
  }
  std::sort(pro.begin(), pro.end());
  std::string b;
  for (const auto& l : pro) b += l + "\n";
  b += swapped.substr(bar);
  return std::min(a, b);
}

struct OracleResult {
  bool ok = true;
  std::size_t generated = 0;
  std::size_t orbits = 0;
  std::string detail;
};

// Generated set for seq 1..max_seq over {foo, bar} must hold exactly one
// member of every brute-force orbit and nothing else.
inline OracleResult compare_with_brute_force(const std::vector<FsOpKind>& ops, int max_seq = 2) {
  OracleResult r;
  std::set<std::string> bf_text;
  std::set<std::string> bf_orbits;
  for (const auto& w : brute_force(ops, max_seq)) {
    bf_text.insert(serialize(w));
    bf_orbits.insert(orbit_key(w));
  }
  std::map<std::string, int> gen_orbits;
  for (int seq = 1; seq <= max_seq; ++seq) {
    Bounds b;
    b.allowed_ops = ops;
    b.seq_length = seq;
    b.file_set = FileSet{{}, {"foo", "bar"}};
    Generator g(b);
    g.for_each(0, g.size(), [&](std::uint64_t, const Workload& w) {
      ++r.generated;
      if (!bf_text.count(serialize(w))) {
        r.ok = false;
        r.detail += "not in brute force: " + serialize(w);
      }
      ++gen_orbits[orbit_key(w)];
    });
  }
  r.orbits = bf_orbits.size();
  for (const auto& [k, n] : gen_orbits) {
    if (n != 1 || !bf_orbits.count(k)) {
      r.ok = false;
      r.detail += "orbit hit " + std::to_string(n) + " times: " + k + "\n";
    }
  }
  if (gen_orbits.size() != bf_orbits.size()) {
    r.ok = false;
    r.detail += "orbits covered " + std::to_string(gen_orbits.size()) + " of " + std::to_string(bf_orbits.size()) + "\n";
  }
  return r;
}

}  // namespace crashsim::testing
