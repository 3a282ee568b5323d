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

#include "crashsim/cli/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "crashsim/util/hash.hpp"

namespace crashsim::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Chunk {
  std::vector<report::BugReport> reports;
  std::vector<HarnessFailure> failures;
  std::uint64_t fingerprint = 0;
  std::uint64_t workloads = 0;
};

std::uint64_t mix(int seq, std::uint64_t index, const std::string& outcome) {
  auto d = sha256(std::to_string(seq) + ":" + std::to_string(index) + ":" + outcome);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
  return v;
}

// Tests one workload and files its outcome into the chunk.
void test_one(Chunk& c, int seq, std::uint64_t index, const ace::Workload& w, const fs::FsTarget& target,
              const harness::RunOptions& run, const report::CampaignMeta& meta) {
  ++c.workloads;
  auto verdicts = harness::run_workload(w, target, run);
  for (const auto& cv : verdicts) {
    if (cv.verdict.outcome == harness::Outcome::harness_error) {
      c.failures.push_back({seq, index, cv.verdict.reason});
      c.fingerprint += mix(seq, index, "harness_error");
      return;
    }
  }
  auto r = report::make_report(index, w, verdicts, target, meta);
  c.fingerprint += mix(seq, index, r ? r->consequence.to_string() : "pass");
  if (r) c.reports.push_back(std::move(*r));
}

// Runs `count` positions split into contiguous per-worker ranges.
std::vector<Chunk> fan_out(std::uint64_t count, std::size_t workers, const std::string& label,
                           std::ostream* progress,
                           const std::function<void(std::uint64_t, Chunk&, std::atomic<std::uint64_t>&)>& step) {
  workers = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
  std::vector<Chunk> chunks(workers);
  std::atomic<std::uint64_t> done{0};
  std::vector<std::future<void>> futures;
  for (std::size_t w = 0; w < workers; ++w) {
    std::uint64_t lo = count * w / workers, hi = count * (w + 1) / workers;
    futures.push_back(std::async(std::launch::async, [&, lo, hi, w] {
      for (std::uint64_t i = lo; i < hi; ++i) step(i, chunks[w], done);
    }));
  }
  auto start = Clock::now();
  for (auto& f : futures) {
    while (f.wait_for(std::chrono::seconds(2)) != std::future_status::ready) {
      if (!progress) continue;
      double secs = std::chrono::duration<double>(Clock::now() - start).count();
      std::uint64_t tested = 0;
      for (const auto& c : chunks) tested += c.workloads;
      *progress << label << ": " << done.load() << "/" << count << " positions, " << std::fixed
                << std::setprecision(0) << tested / secs << " workloads/s\n";
    }
    f.get();
  }
  return chunks;
}

void merge(CampaignResult& result, LevelStats& stats, std::vector<Chunk>& chunks) {
  for (auto& c : chunks) {
    stats.workloads += c.workloads;
    stats.bugs += c.reports.size();
    stats.harness_errors += c.failures.size();
    result.verdict_fingerprint += c.fingerprint;
    for (auto& r : c.reports) result.reports.push_back(std::move(r));
    for (auto& f : c.failures) result.failures.push_back(std::move(f));
  }
}

std::string join_ops(const std::vector<fs::FsOpKind>& ops) {
  std::string out;
  for (auto k : ops) out += (out.empty() ? "" : ",") + std::string(fs::kind_name(k));
  return out;
}

}  // namespace

std::vector<fs::FsOpKind> parse_ops(const std::string& list) {
  std::vector<fs::FsOpKind> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    auto k = fs::kind_from_name(item);
    if (!k || !fs::is_core(*k)) throw ConfigError("not a core operation: '" + item + "'");
    if (std::find(out.begin(), out.end(), *k) == out.end()) out.push_back(*k);
  }
  if (out.empty()) throw ConfigError("--ops needs at least one operation");
  return out;
}

void CampaignConfig::validate() const {
  if (workers < 1) throw ConfigError("--workers must be at least 1");
  if (!corpus && (seq < 1 || seq > 3)) throw ConfigError("--seq must be 1, 2 or 3");
  if (corpus && slice) throw ConfigError("--slice applies to generated workloads only");
  if (export_known && !known_bugs) throw ConfigError("--export-known needs --known-bugs");
  try {
    fs::find_target(fs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ace::Bounds CampaignConfig::bounds(int level) const {
  ace::Bounds b;
  b.seq_length = level;
  if (!ops.empty()) b.allowed_ops = ops;
  return b;
}

std::map<std::string, std::size_t> CampaignResult::class_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& r : reports) ++out[r.consequence.to_string()];
  return out;
}

std::uint64_t CampaignResult::workloads() const {
  std::uint64_t n = 0;
  for (const auto& l : levels) n += l.workloads;
  return n;
}

CampaignResult run_campaign(const CampaignConfig& config, std::ostream* progress) {
  config.validate();
  const auto& target = fs::find_target(config.fs);
  CampaignResult result;

  if (config.corpus) {
    auto entries = load_corpus(*config.corpus);
    LevelStats stats;
    stats.indices = entries.size();
    auto start = Clock::now();
    auto chunks = fan_out(entries.size(), config.workers, "corpus", progress,
                          [&](std::uint64_t i, Chunk& c, std::atomic<std::uint64_t>& done) {
                            if (entries[i].workload) {
                              test_one(c, 0, i, *entries[i].workload, target, config.run, {0, "", config.run.seed});
                            } else {
                              c.failures.push_back({0, i, entries[i].name + ": " + entries[i].error});
                              c.fingerprint += mix(0, i, "parse_error");
                            }
                            ++done;
                          });
    merge(result, stats, chunks);
    stats.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.levels.push_back(stats);
  } else {
    for (int level = 1; level <= config.seq; ++level) {
      ace::Generator gen(config.bounds(level));
      report::CampaignMeta meta{level, gen.bounds().hash(), config.run.seed};
      const bool sliced = config.slice && level == config.seq;
      // A slice takes evenly spaced workloads by emission order.
      std::vector<std::uint64_t> picks;
      std::uint64_t visited = gen.size();
      if (sliced) {
        std::vector<std::uint64_t> emitted;
        gen.for_each(0, gen.size(), [&](std::uint64_t i, const ace::Workload&) { emitted.push_back(i); });
        const std::uint64_t n = std::min<std::uint64_t>(config.slice, emitted.size());
        for (std::uint64_t k = 0; k < n; ++k) picks.push_back(emitted[k * emitted.size() / n]);
      }
      // Unsliced levels hand out index blocks so each worker walks the generator.
      constexpr std::uint64_t kBlock = 4096;
      const std::uint64_t units = sliced ? picks.size() : (gen.size() + kBlock - 1) / kBlock;
      LevelStats stats;
      stats.seq = level;
      stats.indices = visited;
      auto start = Clock::now();
      auto chunks = fan_out(units, config.workers, "seq-" + std::to_string(level), progress,
                            [&](std::uint64_t u, Chunk& c, std::atomic<std::uint64_t>& done) {
                              auto test = [&](std::uint64_t i, const ace::Workload& w) {
                                test_one(c, level, i, w, target, config.run, meta);
                              };
                              if (sliced) {
                                test(picks[u], *gen.at(picks[u]).workload);
                                ++done;
                              } else {
                                std::uint64_t lo = u * kBlock, hi = std::min(gen.size(), lo + kBlock);
                                gen.for_each(lo, hi, test);
                                done += hi - lo;
                              }
                            });
      merge(result, stats, chunks);
      stats.seconds = std::chrono::duration<double>(Clock::now() - start).count();
      result.levels.push_back(stats);
      if (progress) {
        *progress << "seq-" << level << ": " << stats.workloads << " workloads, " << stats.bugs << " buggy, "
                  << stats.harness_errors << " harness errors in " << std::fixed << std::setprecision(1)
                  << stats.seconds << " s (" << std::setprecision(0)
                  << stats.workloads / std::max(stats.seconds, 1e-9) << " workloads/s)\n";
      }
    }
  }

  std::sort(result.reports.begin(), result.reports.end(), [](const auto& a, const auto& b) {
    return std::tie(a.meta.seq, a.index) < std::tie(b.meta.seq, b.index);
  });
  std::sort(result.failures.begin(), result.failures.end(), [](const auto& a, const auto& b) {
    return std::tie(a.seq, a.index) < std::tie(b.seq, b.index);
  });
  result.groups = config.no_group ? report::ungrouped(result.reports) : report::group(result.reports);
  auto db = config.known_bugs ? report::KnownBugDb::load(*config.known_bugs) : report::KnownBugDb{};
  result.suppression = report::suppress_known(result.groups, db);
  result.groups_hash = report::groups_hash(result.groups);
  return result;
}

json summary_json(const CampaignConfig& config, const CampaignResult& result) {
  const auto& target = fs::find_target(config.fs);
  json levels = json::array();
  for (const auto& l : result.levels) {
    json entry = {{"seq", l.seq},
                  {"indices", l.indices},
                  {"workloads", l.workloads},
                  {"bugs", l.bugs},
                  {"harness_errors", l.harness_errors}};
    if (!config.corpus) entry["bounds_hash"] = config.bounds(l.seq).hash();
    levels.push_back(entry);
  }
  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back({{"seq", f.seq}, {"index", f.index}, {"reason", f.reason}});
  std::ostringstream fp;
  fp << std::hex << std::setw(16) << std::setfill('0') << result.verdict_fingerprint;
  return {{"schema", report::kSchemaVersion},
          {"target", target.name()},
          {"target_version", target.version()},
          {"source", config.corpus ? "corpus" : "generated"},
          {"seq", config.corpus ? 0 : config.seq},
          {"ops", join_ops(config.ops.empty() ? fs::core_kinds() : config.ops)},
          {"slice", config.slice},
          {"all_checkpoints", config.run.all_checkpoints},
          {"subset", config.run.subset},
          {"granularity", crashgen::to_string(config.run.granularity)},
          {"seed", config.run.seed},
          {"levels", levels},
          {"workloads", result.workloads()},
          {"bug_verdicts", result.reports.size()},
          {"classes", result.class_counts()},
          {"groups", result.groups.size()},
          {"new_groups", result.suppression.fresh.size()},
          {"suppressed_groups", result.suppression.suppressed_groups},
          {"suppressed_reports", result.suppression.suppressed_reports},
          {"harness_errors", failures},
          {"verdict_fingerprint", fp.str()},
          {"groups_hash", result.groups_hash}};
}

void write_outputs(const CampaignConfig& config, const CampaignResult& result) {
  if (config.out) {
    std::filesystem::create_directories(*config.out);
    std::ofstream reports(*config.out / "reports.jsonl");
    for (const auto& r : result.reports) reports << r.to_json().dump() << "\n";
    auto db = config.known_bugs ? report::KnownBugDb::load(*config.known_bugs) : report::KnownBugDb{};
    std::ofstream groups(*config.out / "groups.jsonl");
    for (const auto& g : result.groups) {
      auto j = g.to_json();
      j["known"] = db.contains(g.key);
      groups << j.dump() << "\n";
    }
    std::ofstream(*config.out / "summary.json") << summary_json(config, result).dump(2) << "\n";
  }
  if (config.export_known) {
    auto db = report::KnownBugDb::load(*config.known_bugs);
    for (const auto& g : result.suppression.fresh) {
      const auto& r = g.representative;
      db.add(g.key, r.target + " seq-" + std::to_string(r.meta.seq) + " index " + std::to_string(r.index));
    }
    db.save(*config.known_bugs);
  }
}

}  // namespace crashsim::cli
