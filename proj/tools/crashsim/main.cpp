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

#include <iostream>

#include <CLI11.hpp>

#include "crashsim/cli/campaign.hpp"

namespace {

using namespace crashsim;

int campaign(cli::CampaignConfig cfg, const std::string& ops, const std::string& gran,
             const std::string& corpus, const std::string& known, const std::string& out) {
  if (!ops.empty()) cfg.ops = cli::parse_ops(ops);
  cfg.run.granularity = crashgen::parse_granularity(gran);
  if (!corpus.empty()) cfg.corpus = corpus;
  if (!known.empty()) cfg.known_bugs = known;
  if (!out.empty()) cfg.out = out;
  auto result = cli::run_campaign(cfg, &std::cerr);
  cli::write_outputs(cfg, result);
  std::cout << "workloads: " << result.workloads() << "\n"
            << "bug verdicts: " << result.reports.size() << "\n";
  for (const auto& [cls, n] : result.class_counts()) std::cout << "  " << cls << ": " << n << "\n";
  std::cout << "groups: " << result.groups.size() << " (" << result.suppression.fresh.size() << " new, "
            << result.suppression.suppressed_groups << " known)\n";
  for (const auto& g : result.suppression.fresh) {
    std::cout << "  [" << g.key.consequence << "] " << g.key.skeleton << " x" << g.size << "  seq-"
              << g.representative.meta.seq << " #" << g.representative.index << "\n";
  }
  if (!result.failures.empty()) {
    std::cout << "harness errors: " << result.failures.size() << "\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(result.failures.size(), 10); ++i) {
      const auto& f = result.failures[i];
      std::cout << "  seq-" << f.seq << " #" << f.index << ": " << f.reason << "\n";
    }
  }
  std::cout << "groups hash: " << result.groups_hash << "\n";
  return result.exit_code();
}

// Fills options absent from the command line with keys from a TOML file;
// keys may sit at top level or under [campaign].
void apply_config_file(CLI::App& sub, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    throw cli::ConfigError("cannot read config " + path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub.get_name()}) {
      throw cli::ConfigError("config key " + item.fullname() + " is not a campaign setting");
    }
    auto* opt = item.name == "config" ? nullptr : sub.get_option_no_throw("--" + item.name);
    if (!opt) throw cli::ConfigError("unknown config key " + item.fullname());
    if (opt->count() > 0) continue;
    try {
      opt->add_result(item.inputs);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw cli::ConfigError("config key " + item.name + ": " + e.what());
    }
  }
}

int replay(const std::string& file, std::size_t line, const std::string& fs) {
  auto r = cli::read_report(file, line);
  auto res = cli::replay_report(r, fs.empty() ? std::nullopt : std::optional<std::string>(fs));
  if (res.refused) {
    std::cerr << "refusing to replay: " << res.message << "\n";
    return 2;
  }
  std::cout << r.workload << "target: " << r.target << "\ncrash: " << r.descriptor << "\nreported: "
            << r.consequence.to_string() << "\nreplayed: " << res.consequence << "\n"
            << harness::format_verdict(res.verdict.verdict);
  return res.reproduced ? 0 : 1;
}

int run_corpus(const std::string& dir, const std::string& fs) {
  std::vector<std::string> names = fs == "all" ? crashsim::fs::target_names() : std::vector<std::string>{fs};
  bool ok = true;
  for (const auto& name : names) {
    auto rows = cli::run_corpus(dir, crashsim::fs::find_target(name));
    std::size_t matched = 0;
    for (const auto& r : rows) matched += r.match;
    std::cout << "== " << name << ": " << matched << "/" << rows.size() << " match\n"
              << cli::format_corpus_table(rows);
    ok = ok && matched == rows.size();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crashsim: bounded crash-consistency testing for simulated file systems"};
  app.require_subcommand(1);

  cli::CampaignConfig cfg;
  std::string ops, gran = "op", corpus, known, out;
  auto* camp = app.add_subcommand("campaign", "generate and test workloads, then group bug reports");
  std::string config_file;
  camp->add_option("--config", config_file, "TOML file with the same keys as the flags; flags win");
  camp->add_option("--fs", cfg.fs, "file-system target")->capture_default_str();
  camp->add_option("--seq", cfg.seq, "run sequence lengths 1..N in order")->capture_default_str();
  camp->add_option("--ops", ops, "comma-separated core operations (default: all)");
  camp->add_option("--corpus", corpus, "test the .wl files of a directory instead of generating");
  camp->add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
  camp->add_flag("--all-checkpoints", cfg.run.all_checkpoints, "crash at every persistence point");
  camp->add_flag("--subset", cfg.run.subset, "also crash inside epochs with reordered writes");
  camp->add_option("--granularity", gran, "subset unit: op or sector")->capture_default_str();
  camp->add_option("--seed", cfg.run.seed, "seed for sampled subsets")->capture_default_str();
  camp->add_option("--known-bugs", known, "known-bug database (JSON)");
  camp->add_flag("--export-known", cfg.export_known, "append new groups to the known-bug database");
  camp->add_option("--out", out, "output directory for reports.jsonl, groups.jsonl, summary.json");
  camp->add_flag("--no-group", cfg.no_group, "one group per report");
  camp->add_option("--slice", cfg.slice, "test N evenly spread workloads of the last sequence length");

  std::string rfile, rfs;
  std::size_t rline = 0;
  auto* rep = app.add_subcommand("replay", "re-run one bug report");
  rep->add_option("file", rfile, "reports.jsonl or groups.jsonl")->required();
  rep->add_option("line", rline, "0-based line in the file")->capture_default_str();
  rep->add_option("--fs", rfs, "target to replay on; must match the report");

  std::string cdir, cfs = "all";
  auto* cor = app.add_subcommand("run-corpus", "run every .wl file in all-checkpoints mode");
  cor->add_option("dir", cdir, "corpus directory")->required();
  cor->add_option("--fs", cfs, "target name or 'all'")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*camp && !config_file.empty()) apply_config_file(*camp, config_file);
    if (*camp) return campaign(cfg, ops, gran, corpus, known, out);
    if (*rep) return replay(rfile, rline, rfs);
    if (*cor) return run_corpus(cdir, cfs);
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
