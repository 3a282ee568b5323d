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

#include <charconv>
#include <sstream>

#include "crashsim/ace/workload.hpp"

namespace crashsim::ace {

using fs::FallocMode;
using fs::FsOp;
using fs::FsOpKind;

namespace {

constexpr std::string_view kBodyMarker = "---body---";
constexpr std::string_view kCrashMarker = "---crash---";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> tokenize(std::string_view line) {
  std::string spaced;
  for (char c : line) {
    if (c == '(') spaced += ' ';
    spaced += c;
  }
  std::istringstream in(spaced);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::string normalize_path(const std::string& p) {
  if (p == "/") return p;
  std::string out = p;
  while (!out.empty() && out.front() == '/') out.erase(out.begin());
  while (!out.empty() && out.back() == '/') out.pop_back();
  return out;
}

std::uint64_t parse_size(std::string_view s, std::size_t line) {
  std::uint64_t mult = 1;
  if (!s.empty() && (s.back() == 'K' || s.back() == 'k')) {
    mult = 1024;
    s.remove_suffix(1);
  } else if (!s.empty() && (s.back() == 'M' || s.back() == 'm')) {
    mult = 1024 * 1024;
    s.remove_suffix(1);
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "bad size '" + std::string(s) + "'");
  }
  return v * mult;
}

fs::ByteRange parse_range(std::string_view tok, std::size_t line) {
  if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')') {
    throw ParseError(line, "bad range '" + std::string(tok) + "'");
  }
  tok = tok.substr(1, tok.size() - 2);
  auto dash = tok.find('-');
  if (dash == std::string_view::npos) throw ParseError(line, "bad range '" + std::string(tok) + "'");
  fs::ByteRange r{parse_size(tok.substr(0, dash), line), parse_size(tok.substr(dash + 1), line)};
  if (r.end <= r.begin) throw ParseError(line, "empty range");
  return r;
}

std::string format_range(const fs::ByteRange& r) {
  return "(" + format_size(r.begin) + "-" + format_size(r.end) + ")";
}

std::string_view falloc_flag(FallocMode m) {
  switch (m) {
    case FallocMode::none: return "";
    case FallocMode::keep_size: return "-k";
    case FallocMode::zero_range: return "-z";
    case FallocMode::zero_range_keep_size: return "-zk";
    case FallocMode::punch_hole_keep_size: return "-p";
  }
  return "";
}

std::optional<FallocMode> falloc_from_flag(std::string_view f) {
  for (auto m : fs::all_falloc_modes()) {
    if (!falloc_flag(m).empty() && falloc_flag(m) == f) return m;
  }
  if (f == "-kz") return FallocMode::zero_range_keep_size;
  if (f == "-pk" || f == "-kp") return FallocMode::punch_hole_keep_size;
  return std::nullopt;
}

// Parses one non-marker line into zero or more ops (mkdir -p expands).
std::vector<FsOp> parse_line(const std::vector<std::string>& toks, std::size_t line) {
  std::string name = toks[0];
  std::vector<std::string> args(toks.begin() + 1, toks.end());

  std::optional<FallocMode> alias_mode;
  if (name == "create" || name == "touch") name = "creat";
  else if (name == "mv") name = "rename";
  else if (name == "d-write") name = "dwrite";
  else if (name == "m-write") name = "mwrite";
  else if (name == "punch_hole") name = "falloc", alias_mode = FallocMode::punch_hole_keep_size;
  else if (name == "fzero") name = "falloc", alias_mode = FallocMode::zero_range;

  // Leading flags.
  std::vector<std::string> flags;
  while (!args.empty() && args.front().size() > 1 && args.front()[0] == '-') {
    flags.push_back(args.front());
    args.erase(args.begin());
  }
  std::optional<fs::ByteRange> range;
  for (auto it = args.begin(); it != args.end(); ++it) {
    if (!it->empty() && it->front() == '(') {
      range = parse_range(*it, line);
      args.erase(it);
      break;
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw ParseError(line, name + " expects " + std::to_string(n) + " argument(s), got " +
                                 std::to_string(args.size()));
    }
  };
  auto no_flags = [&] {
    if (!flags.empty()) throw ParseError(line, "unexpected flag " + flags.front());
  };
  auto need_range = [&] {
    if (!range) throw ParseError(line, name + " needs a byte range");
  };
  auto no_range = [&] {
    if (range) throw ParseError(line, name + " takes no byte range");
  };

  FsOp op;
  if (name == "setxattr" || name == "removexattr") {
    no_flags();
    no_range();
    op.kind = FsOpKind::xattr;
    if (name == "setxattr") {
      need(3);
      op.xattr_value = args[2];
    } else {
      need(2);
      op.xattr_action = fs::XattrAction::remove;
    }
    op.path = normalize_path(args[0]);
    op.xattr_name = args[1];
    return {op};
  }
  auto kind = fs::kind_from_name(name);
  if (!kind || *kind == FsOpKind::xattr) throw ParseError(line, "unknown operation '" + toks[0] + "'");
  op.kind = *kind;

  switch (op.kind) {
    case FsOpKind::mkdir: {
      no_range();
      need(1);
      bool parents = false;
      for (const auto& f : flags) {
        if (f != "-p") throw ParseError(line, "unexpected flag " + f);
        parents = true;
      }
      std::string path = normalize_path(args[0]);
      if (!parents) {
        op.path = path;
        return {op};
      }
      std::vector<FsOp> out;
      std::string prefix;
      for (const auto& part : fs::split_path(path)) {
        prefix = fs::join_path(prefix.empty() ? std::string(fs::kRoot) : prefix, part);
        op.path = prefix;
        out.push_back(op);
      }
      return out;
    }
    case FsOpKind::creat:
    case FsOpKind::unlink:
    case FsOpKind::remove:
    case FsOpKind::rmdir:
    case FsOpKind::fsync:
    case FsOpKind::fdatasync:
      no_flags();
      no_range();
      need(1);
      op.path = normalize_path(args[0]);
      return {op};
    case FsOpKind::sync:
      no_flags();
      no_range();
      need(0);
      return {op};
    case FsOpKind::write:
    case FsOpKind::dwrite:
    case FsOpKind::mwrite:
    case FsOpKind::msync:
      no_flags();
      need_range();
      need(1);
      op.path = normalize_path(args[0]);
      op.range = range;
      return {op};
    case FsOpKind::falloc: {
      need_range();
      need(1);
      op.falloc = alias_mode.value_or(FallocMode::none);
      for (const auto& f : flags) {
        if (alias_mode == FallocMode::zero_range && f == "-k") {
          op.falloc = FallocMode::zero_range_keep_size;
          continue;
        }
        if (alias_mode == FallocMode::punch_hole_keep_size && f == "-k") continue;
        auto m = falloc_from_flag(f);
        if (!m || alias_mode) throw ParseError(line, "unexpected flag " + f);
        op.falloc = *m;
      }
      op.path = normalize_path(args[0]);
      op.range = range;
      return {op};
    }
    case FsOpKind::link:
    case FsOpKind::rename:
      no_flags();
      no_range();
      need(2);
      op.path = normalize_path(args[0]);
      op.path2 = normalize_path(args[1]);
      return {op};
    case FsOpKind::symlink:
      no_flags();
      no_range();
      need(2);
      op.path = args[0];
      op.path2 = normalize_path(args[1]);
      return {op};
    case FsOpKind::truncate:
      no_flags();
      no_range();
      need(2);
      op.path = normalize_path(args[0]);
      op.size = parse_size(args[1], line);
      return {op};
    case FsOpKind::xattr:
      break;
  }
  throw ParseError(line, "unknown operation '" + toks[0] + "'");
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string Skeleton::to_string() const {
  std::string out;
  for (auto k : ops) {
    if (!out.empty()) out += ',';
    out += fs::kind_name(k);
  }
  return out;
}

Skeleton Skeleton::parse(std::string_view text) {
  Skeleton s;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto part = text.substr(0, comma);
    auto k = fs::kind_from_name(part);
    if (!k || !fs::is_core(*k)) throw std::invalid_argument("bad skeleton op '" + std::string(part) + "'");
    s.ops.push_back(*k);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return s;
}

Skeleton skeleton_of(const std::vector<FsOp>& body) {
  Skeleton s;
  for (const auto& op : body) {
    if (fs::is_core(op.kind)) s.ops.push_back(op.kind);
  }
  return s;
}

std::string format_size(std::uint64_t bytes) {
  if (bytes != 0 && bytes % (1024 * 1024) == 0) return std::to_string(bytes / (1024 * 1024)) + "M";
  if (bytes != 0 && bytes % 1024 == 0) return std::to_string(bytes / 1024) + "K";
  return std::to_string(bytes);
}

std::string serialize_op(const FsOp& op) {
  std::string name(fs::kind_name(op.kind));
  switch (op.kind) {
    case FsOpKind::sync: return name;
    case FsOpKind::write:
    case FsOpKind::dwrite:
    case FsOpKind::mwrite:
    case FsOpKind::msync: return name + " " + format_range(*op.range) + " " + op.path;
    case FsOpKind::falloc: {
      std::string flag(falloc_flag(op.falloc));
      return name + (flag.empty() ? "" : " " + flag) + " " + format_range(*op.range) + " " + op.path;
    }
    case FsOpKind::link:
    case FsOpKind::symlink:
    case FsOpKind::rename: return name + " " + op.path + " " + op.path2;
    case FsOpKind::truncate: return name + " " + op.path + " " + format_size(op.size);
    case FsOpKind::xattr:
      if (op.xattr_action == fs::XattrAction::remove) return "removexattr " + op.path + " " + op.xattr_name;
      return "setxattr " + op.path + " " + op.xattr_name + " " + op.xattr_value;
    default: return name + " " + op.path;
  }
}

std::string serialize(const Workload& w) {
  std::string out;
  for (const auto& op : w.prologue) out += serialize_op(op) + "\n";
  if (!w.prologue.empty()) out += std::string(kBodyMarker) + "\n";
  for (const auto& op : w.body) out += serialize_op(op) + "\n";
  out += std::string(kCrashMarker) + "\n";
  return out;
}

Workload parse(std::string_view text) {
  Workload w;
  std::vector<FsOp> current;
  bool saw_body = false, saw_crash = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto line = trim(raw);
    if (line.empty()) continue;
    if (saw_crash) throw ParseError(line_no, "content after crash marker");
    if (line == kBodyMarker) {
      if (saw_body) throw ParseError(line_no, "duplicate body marker");
      saw_body = true;
      w.prologue = std::move(current);
      current.clear();
      continue;
    }
    if (line == kCrashMarker) {
      saw_crash = true;
      continue;
    }
    for (auto& op : parse_line(tokenize(line), line_no)) current.push_back(std::move(op));
  }
  w.body = std::move(current);
  w.skeleton = skeleton_of(w.body);
  return w;
}

std::map<std::string, std::string> parse_expectations(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    auto l = trim(line);
    if (l.empty() || l.front() != '#') continue;
    l.remove_prefix(1);
    l = trim(l);
    if (l.substr(0, 7) != "expect ") continue;
    l.remove_prefix(7);
    auto colon = l.find(':');
    if (colon == std::string_view::npos) continue;
    out[std::string(trim(l.substr(0, colon)))] = std::string(trim(l.substr(colon + 1)));
  }
  return out;
}

}  // namespace crashsim::ace
