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

#include "crashsim/report/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "crashsim/util/hash.hpp"

namespace crashsim::report {

using harness::DiffKind;
using nlohmann::json;

namespace {

constexpr const char* kNames[] = {"unmountable",   "spurious_entry",    "file_missing",
                                  "data_mismatch", "metadata_mismatch", "unwritable_dir"};

json diff_json(const std::vector<harness::DiffEntry>& diff) {
  json out = json::array();
  for (const auto& d : diff) {
    out.push_back({{"kind", harness::diff_kind_name(d.kind)},
                   {"path", d.path},
                   {"expected", d.expected},
                   {"actual", d.actual}});
  }
  return out;
}

}  // namespace

std::string ConsequenceClass::to_string() const {
  std::string out = kNames[static_cast<int>(kind)];
  if (!detail.empty()) out += ":" + detail;
  return out;
}

ConsequenceClass ConsequenceClass::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  for (int i = 0; i < 6; ++i) {
    if (head != kNames[i]) continue;
    ConsequenceClass c{static_cast<Consequence>(i), colon == std::string::npos ? "" : text.substr(colon + 1)};
    bool meta = c.kind == Consequence::metadata_mismatch;
    if (meta != !c.detail.empty()) break;
    if (meta && !harness::diff_kind_from_name(c.detail)) break;
    return c;
  }
  throw std::invalid_argument("unknown consequence class: " + text);
}

ConsequenceClass classify(const std::vector<harness::DiffEntry>& diff) {
  if (diff.empty()) throw std::invalid_argument("classify: empty diff");
  // Diff kinds map onto classes monotonically, so the smallest kind decides.
  DiffKind k = std::min_element(diff.begin(), diff.end(), [](const auto& a, const auto& b) {
                 return a.kind < b.kind;
               })->kind;
  switch (k) {
    case DiffKind::unmountable: return {Consequence::unmountable, ""};
    case DiffKind::spurious: return {Consequence::spurious_entry, ""};
    case DiffKind::missing: return {Consequence::file_missing, ""};
    case DiffKind::data: return {Consequence::data_mismatch, ""};
    case DiffKind::size:
    case DiffKind::link_count:
    case DiffKind::block_count:
    case DiffKind::xattr: return {Consequence::metadata_mismatch, std::string(harness::diff_kind_name(k))};
    case DiffKind::unwritable: return {Consequence::unwritable_dir, ""};
  }
  throw std::logic_error("classify: unhandled diff kind");
}

std::string BugReport::diff_hash() const { return to_hex(sha256(diff_json(diff).dump())).substr(0, 16); }

json BugReport::to_json() const {
  json j = {{"schema", schema},
            {"index", index},
            {"workload", workload},
            {"skeleton", skeleton},
            {"descriptor", descriptor},
            {"consequence", consequence.to_string()},
            {"diff", diff_json(diff)},
            {"target", target},
            {"target_version", target_version},
            {"seq", meta.seq},
            {"bounds_hash", meta.bounds_hash},
            {"seed", meta.seed}};
  if (!bug_seed.empty()) j["bug_seed"] = bug_seed;
  return j;
}

BugReport BugReport::from_json(const json& j) {
  BugReport r;
  r.schema = j.at("schema").get<int>();
  if (r.schema != kSchemaVersion) {
    throw std::invalid_argument("unsupported report schema " + std::to_string(r.schema));
  }
  r.index = j.at("index").get<std::uint64_t>();
  r.workload = j.at("workload").get<std::string>();
  r.skeleton = j.at("skeleton").get<std::string>();
  r.descriptor = j.at("descriptor").get<std::string>();
  r.consequence = ConsequenceClass::parse(j.at("consequence").get<std::string>());
  for (const auto& d : j.at("diff")) {
    auto kind = harness::diff_kind_from_name(d.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown diff kind in report");
    r.diff.push_back({*kind, d.at("path").get<std::string>(), d.at("expected").get<std::string>(),
                      d.at("actual").get<std::string>()});
  }
  r.target = j.at("target").get<std::string>();
  r.target_version = j.at("target_version").get<std::string>();
  r.meta.seq = j.at("seq").get<int>();
  r.meta.bounds_hash = j.at("bounds_hash").get<std::string>();
  r.meta.seed = j.at("seed").get<std::uint64_t>();
  r.bug_seed = j.value("bug_seed", "");
  return r;
}

std::optional<BugReport> make_report(std::uint64_t index, const ace::Workload& w,
                                     const std::vector<harness::CrashVerdict>& verdicts,
                                     const fs::FsTarget& target, const CampaignMeta& meta) {
  for (const auto& cv : verdicts) {
    if (cv.verdict.outcome != harness::Outcome::bug) continue;
    BugReport r;
    r.index = index;
    r.workload = ace::serialize(w);
    r.skeleton = w.skeleton.to_string();
    r.descriptor = cv.descriptor;
    r.consequence = classify(cv.verdict.diff);
    r.diff = cv.verdict.diff;
    r.target = target.name();
    r.target_version = target.version();
    r.meta = meta;
#ifndef NDEBUG
    if (auto s = target.seed()) r.bug_seed = s->id;
#endif
    return r;
  }
  return std::nullopt;
}

json Group::to_json() const {
  return {{"skeleton", key.skeleton},
          {"consequence", key.consequence},
          {"size", size},
          {"representative", representative.to_json()}};
}

std::vector<Group> group(const std::vector<BugReport>& reports) {
  std::map<GroupKey, Group> groups;
  for (const auto& r : reports) {
    GroupKey key{r.skeleton, r.consequence.to_string()};
    auto [it, fresh] = groups.try_emplace(key, Group{key, r, 0});
    auto& rep = it->second.representative;
    if (std::tie(r.meta.seq, r.index) < std::tie(rep.meta.seq, rep.index)) rep = r;
    ++it->second.size;
  }
  std::vector<Group> out;
  for (auto& [k, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<Group> ungrouped(const std::vector<BugReport>& reports) {
  std::vector<Group> out;
  for (const auto& r : reports) out.push_back({{r.skeleton, r.consequence.to_string()}, r, 1});
  std::sort(out.begin(), out.end(), [](const Group& a, const Group& b) {
    return std::tie(a.representative.meta.seq, a.representative.index) <
           std::tie(b.representative.meta.seq, b.representative.index);
  });
  return out;
}

std::string groups_hash(const std::vector<Group>& groups) {
  Sha256 h;
  for (const auto& g : groups) {
    h.update(g.to_json().dump());
    h.update("\n");
  }
  return to_hex(h.finish());
}

KnownBugDb KnownBugDb::load(const std::filesystem::path& path) {
  KnownBugDb db;
  std::ifstream in(path);
  if (!in) return db;
  json j = json::parse(in);
  for (const auto& e : j.at("entries")) {
    db.entries_.push_back({{e.at("skeleton").get<std::string>(), e.at("consequence").get<std::string>()},
                           e.value("note", "")});
  }
  return db;
}

void KnownBugDb::save(const std::filesystem::path& path) const {
  json entries = json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"skeleton", e.key.skeleton}, {"consequence", e.key.consequence}, {"note", e.note}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << json{{"schema", kSchemaVersion}, {"entries", entries}}.dump(2) << "\n";
}

bool KnownBugDb::contains(const GroupKey& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
}

bool KnownBugDb::add(const GroupKey& key, std::string note) {
  if (contains(key)) return false;
  entries_.push_back({key, std::move(note)});
  return true;
}

Suppression suppress_known(const std::vector<Group>& groups, const KnownBugDb& db) {
  Suppression s;
  for (const auto& g : groups) {
    if (db.contains(g.key)) {
      ++s.suppressed_groups;
      s.suppressed_reports += g.size;
    } else {
      s.fresh.push_back(g);
    }
  }
  return s;
}

}  // namespace crashsim::report
