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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "crashsim/cli/campaign.hpp"

namespace crashsim::cli {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("corpus directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> out;
  for (const auto& f : files) {
    CorpusEntry entry;
    entry.name = f.filename().string();
    auto text = read_file(f);
    try {
      entry.workload = ace::parse(text);
      entry.expect = ace::parse_expectations(text);
    } catch (const ace::ParseError& e) {
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<CorpusRow> run_corpus(const std::filesystem::path& dir, const fs::FsTarget& target) {
  harness::RunOptions opt;
  opt.all_checkpoints = true;
  std::vector<CorpusRow> rows;
  for (const auto& e : load_corpus(dir)) {
    CorpusRow row;
    row.file = e.name;
    auto it = e.expect.find(target.name());
    // Seeded variants only promise their annotated entries; the rest are shown as-is.
    row.expected = it != e.expect.end() ? it->second : target.seed() ? "-" : "none";
    if (!e.workload) {
      row.observed = "parse_error";
      row.detail = e.error;
    } else {
      auto verdicts = harness::run_workload(*e.workload, target, opt);
      row.observed = "none";
      for (const auto& cv : verdicts) {
        if (cv.verdict.outcome == harness::Outcome::harness_error) {
          row.observed = "harness_error";
          row.detail = cv.verdict.reason;
          break;
        }
      }
      if (row.observed == "none") {
        if (auto r = report::make_report(0, *e.workload, verdicts, target, {})) {
          row.observed = r->consequence.to_string();
          row.detail = r->descriptor;
        }
      }
    }
    row.match = row.observed == row.expected || (row.expected == "-" && row.observed != "harness_error" &&
                                                  row.observed != "parse_error");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_corpus_table(const std::vector<CorpusRow>& rows) {
  std::size_t w1 = 4, w2 = 8, w3 = 8;
  for (const auto& r : rows) {
    w1 = std::max(w1, r.file.size());
    w2 = std::max(w2, r.expected.size());
    w3 = std::max(w3, r.observed.size());
  }
  std::ostringstream out;
  auto line = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d) {
    out << a << std::string(w1 - a.size() + 2, ' ') << b << std::string(w2 - b.size() + 2, ' ') << c
        << std::string(w3 - c.size() + 2, ' ') << d << "\n";
  };
  line("file", "expected", "observed", "match");
  for (const auto& r : rows) {
    line(r.file, r.expected, r.observed, r.match ? "yes" : "NO");
    if (!r.match && !r.detail.empty()) out << "    " << r.detail << "\n";
  }
  return out.str();
}

ReplayResult replay_report(const report::BugReport& r, const std::optional<std::string>& fs_override) {
  ReplayResult out;
  out.verdict.descriptor = r.descriptor;
  const std::string name = fs_override.value_or(r.target);
  if (name != r.target) {
    out.refused = true;
    out.message = "report was produced on '" + r.target + "', not '" + name + "'";
    return out;
  }
  const fs::FsTarget* target = nullptr;
  try {
    target = &fs::find_target(name);
  } catch (const std::invalid_argument& e) {
    out.refused = true;
    out.message = e.what();
    return out;
  }
  if (target->version() != r.target_version) {
    out.refused = true;
    out.message = "report was produced on " + r.target + " version " + r.target_version + ", this build has " +
                  target->version();
    return out;
  }
  out.verdict = harness::replay_crash(ace::parse(r.workload), *target, r.descriptor);
  const auto& v = out.verdict.verdict;
  out.consequence = v.outcome == harness::Outcome::bug ? report::classify(v.diff).to_string()
                                                        : std::string(harness::outcome_name(v.outcome));
  if (v.outcome == harness::Outcome::pass) out.consequence = "none";
  out.reproduced = out.consequence == r.consequence.to_string() && v.diff == r.diff;
  return out;
}

report::BugReport read_report(const std::filesystem::path& file, std::size_t line) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read " + file.string());
  std::string text;
  for (std::size_t i = 0; std::getline(in, text); ++i) {
    if (i != line) continue;
    auto j = nlohmann::json::parse(text);
    return report::BugReport::from_json(j.contains("representative") ? j.at("representative") : j);
  }
  throw ConfigError(file.string() + " has no line " + std::to_string(line));
}

}  // namespace crashsim::cli
