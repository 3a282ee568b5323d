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

#include <gtest/gtest.h>

#include "crashsim/cli/campaign.hpp"

namespace crashsim {
namespace {

TEST(CorpusIntegration, EveryEntryParsesAndRoundTrips) {
  auto entries = cli::load_corpus(CRASHSIM_CORPUS_DIR);
  ASSERT_EQ(entries.size(), 36u);
  for (const auto& e : entries) {
    ASSERT_TRUE(e.workload) << e.name << ": " << e.error;
    EXPECT_EQ(ace::parse(ace::serialize(*e.workload)), *e.workload) << e.name;
    for (const auto& [target, cls] : e.expect) {
      EXPECT_NO_THROW(fs::find_target(target)) << e.name;
      EXPECT_NO_THROW(report::ConsequenceClass::parse(cls)) << e.name;
    }
  }
}

// Every mirror is annotated for its variant, and at least one carries the
// variant's headline class; other mirrors may differ.
TEST(CorpusIntegration, MirrorsAreAnnotated) {
  auto entries = cli::load_corpus(CRASHSIM_CORPUS_DIR);
  for (const auto& name : fs::target_names()) {
    auto seed = fs::find_target(name).seed();
    if (!seed || seed->mirrors.empty()) continue;
    bool headline = false;
    for (const auto& m : seed->mirrors) {
      auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.name == m + ".wl"; });
      ASSERT_NE(it, entries.end()) << m;
      ASSERT_TRUE(it->expect.count(name)) << m;
      headline = headline || it->expect.at(name) == seed->consequence;
    }
    EXPECT_TRUE(headline) << name;
  }
}

class CorpusOnTarget : public ::testing::TestWithParam<std::string> {};

TEST_P(CorpusOnTarget, AnnotatedConsequencesReproduce) {
  for (const auto& row : cli::run_corpus(CRASHSIM_CORPUS_DIR, fs::find_target(GetParam()))) {
    EXPECT_TRUE(row.match) << row.file << ": expected " << row.expected << ", observed " << row.observed << " "
                           << row.detail;
  }
}

INSTANTIATE_TEST_SUITE_P(AllTargets, CorpusOnTarget, ::testing::ValuesIn(fs::target_names()),
                         [](const auto& info) {
                           std::string n = info.param;
                           std::replace(n.begin(), n.end(), '-', '_');
                           return n;
                         });

}  // namespace
}  // namespace crashsim
