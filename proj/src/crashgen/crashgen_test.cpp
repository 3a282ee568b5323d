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

#include "crashsim/crashgen/crashgen.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

namespace crashsim::crashgen {
namespace {

using blockdev::BlockDevice;
using blockdev::kDefaultDeviceSize;
using blockdev::kSectorSize;
using blockdev::split_epochs;

std::vector<std::uint8_t> filled(std::size_t n, std::uint8_t b) {
  return std::vector<std::uint8_t>(n, b);
}

TEST(CheckpointStatesTest, OnePerCheckpoint) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  auto base = dev.snapshot();
  dev.write(0, filled(512, 1));
  dev.flush();
  dev.insert_checkpoint();
  dev.write(8, filled(512, 2));
  dev.flush();
  dev.insert_checkpoint();
  auto out = crash_states_at_checkpoints(base, dev.log());
  ASSERT_EQ(out.states.size(), 2u);
  EXPECT_FALSE(out.warning);
  EXPECT_EQ(out.states[0].checkpoint_id, 1u);
  EXPECT_EQ(out.states[1].checkpoint_id, 2u);
  EXPECT_EQ(out.states[0].image, blockdev::replay(base, dev.log(), blockdev::CheckpointId{1}));
  EXPECT_EQ(out.states[1].image, dev.snapshot());
}

TEST(CheckpointStatesTest, NoCheckpointWarns) {
  DiskImage base(kDefaultDeviceSize);
  auto out = crash_states_at_checkpoints(base, IoLog{});
  EXPECT_TRUE(out.states.empty());
  EXPECT_TRUE(out.warning.has_value());
}

TEST(SubsetTest, CardinalityAndEmpty) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  dev.write(0, filled(512, 1));
  dev.write(1, filled(512, 2));
  dev.write(2, filled(512, 3));
  dev.flush();
  dev.flush();
  auto epochs = split_epochs(dev.log()).epochs;
  auto subsets = enumerate_target_subsets(epochs, 0, {});
  EXPECT_EQ(subsets.size(), 8u);
  EXPECT_EQ(std::set(subsets.begin(), subsets.end()).size(), 8u);
  for (const auto& s : subsets) EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  auto empty = enumerate_target_subsets(epochs, 1, {});
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_TRUE(empty[0].empty());
  EXPECT_THROW(enumerate_target_subsets(epochs, 2, {}), CrashgenError);
}

// Independent splitter: one unit per 512 bytes of every write.
std::size_t brute_sector_units(const std::vector<std::uint64_t>& lengths) {
  std::size_t n = 0;
  for (auto len : lengths) {
    for (std::uint64_t b = 0; b + kSectorSize <= len; b += kSectorSize) ++n;
  }
  return n;
}

TEST(SubsetTest, SectorSplitUnitCount) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  dev.write(0, filled(8192, 1));
  auto epochs = split_epochs(dev.log()).epochs;
  SubsetSelector sel;
  sel.granularity = Granularity::sector;
  EXPECT_EQ(epoch_units(epochs[0], Granularity::sector).size(), 8192u / 512u);
  EXPECT_EQ(epoch_units(epochs[0], Granularity::sector).size(), brute_sector_units({8192}));
  EXPECT_EQ(subset_space(epochs, 0, sel, 1ull << 40), 1ull << 16);
  EXPECT_EQ(enumerate_target_subsets(epochs, 0, sel).size(), 1u << 16);
}

TEST(SubsetTest, FuaTerminatorNeverSplit) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  dev.write(0, filled(1024, 1));
  dev.write(16, filled(4096, 2), true);
  auto epochs = split_epochs(dev.log()).epochs;
  auto units = epoch_units(epochs[0], Granularity::sector);
  ASSERT_EQ(units.size(), 3u);
  EXPECT_EQ(units[2].length, 4096u);
  EXPECT_EQ(units[2].element, 1u);
}

TEST(SubsetTest, ContiguousPrefixMode) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  dev.write(0, filled(2048, 1));
  dev.write(16, filled(1024, 2));
  auto epochs = split_epochs(dev.log()).epochs;
  SubsetSelector sel;
  sel.granularity = Granularity::sector;
  sel.contiguous_prefix = true;
  auto subsets = enumerate_target_subsets(epochs, 0, sel);
  EXPECT_EQ(subsets.size(), 5u * 3u);
  for (const auto& s : subsets) {
    // Kept sectors of record 0 (units 0..3) must be a prefix.
    std::size_t n0 = std::count_if(s.begin(), s.end(), [](auto i) { return i < 4; });
    for (std::size_t k = 0; k < n0; ++k) EXPECT_EQ(s[k], k);
  }
}

TEST(SubsetTest, RandomModeReproducibleWithoutReplacement) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  dev.write(0, filled(8192, 1));
  auto epochs = split_epochs(dev.log()).epochs;
  SubsetSelector sel;
  sel.mode = SubsetSelector::Mode::random;
  sel.seed = 7;
  sel.count = 100;
  sel.granularity = Granularity::sector;
  auto a = enumerate_target_subsets(epochs, 0, sel);
  auto b = enumerate_target_subsets(epochs, 0, sel);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 100u);
  EXPECT_EQ(std::set(a.begin(), a.end()).size(), 100u);
  sel.seed = 8;
  EXPECT_NE(enumerate_target_subsets(epochs, 0, sel), a);
  sel.granularity = Granularity::op;  // 2 subsets only
  EXPECT_EQ(enumerate_target_subsets(epochs, 0, sel).size(), 2u);
}

TEST(SubsetTest, FullAndEmptyIdentities) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  auto base = dev.snapshot();
  dev.write(0, filled(512, 1));
  dev.flush();
  auto s_prefix_end = dev.log().records().back().seq;
  dev.write(0, filled(512, 2));
  dev.write(4, filled(1024, 3));
  dev.flush();
  auto s_target_end = dev.log().records().back().seq;
  auto epochs = split_epochs(dev.log()).epochs;
  auto full = build_subset_state(base, epochs, 1, {0, 1}, Granularity::op);
  EXPECT_EQ(full.image, blockdev::replay(base, dev.log(), blockdev::RecordSeq{s_target_end}));
  auto none = build_subset_state(base, epochs, 1, {}, Granularity::op);
  EXPECT_EQ(none.image, blockdev::replay(base, dev.log(), blockdev::RecordSeq{s_prefix_end}));
  EXPECT_EQ(full.subset->to_string(), "prefix=1;kept=0,1;gran=op");
}

TEST(SubsetTest, DescriptorRoundTrip) {
  SubsetDescriptor d{3, {0, 2, 5}, Granularity::sector};
  EXPECT_EQ(SubsetDescriptor::parse(d.to_string()), d);
  SubsetDescriptor e{0, {}, Granularity::op};
  EXPECT_EQ(SubsetDescriptor::parse(e.to_string()), e);
  EXPECT_THROW(SubsetDescriptor::parse("prefix=1;kept=2,1;gran=op"), CrashgenError);
  EXPECT_THROW(SubsetDescriptor::parse("prefix=x;kept=;gran=op"), CrashgenError);
}

// Checkpoint mode equals subset mode with every epoch up to the mark fully
// applied.
TEST(SubsetTest, CheckpointModeEquivalence) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  auto base = dev.snapshot();
  dev.write(0, filled(512, 1));
  dev.flush();
  dev.insert_checkpoint();
  dev.write(3, filled(512, 2));
  dev.write(9, filled(512, 3), true);
  dev.insert_checkpoint();
  auto split = split_epochs(dev.log());
  auto states = crash_states_at_checkpoints(base, dev.log()).states;
  for (const auto& mark : split.checkpoints) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < mark.offset; ++i) kept.push_back(i);
    auto s = build_subset_state(base, split.epochs, mark.epoch_index, kept, Granularity::op);
    EXPECT_EQ(s.image, states[mark.id - 1].image);
  }
}

// Order preservation: applying kept overlapping writes in issue order means the
// last kept writer owns every byte it covers.
TEST(SubsetTest, RandomOverlappingLogsPreserveOrder) {
  constexpr std::uint64_t kSize = 16 * 4096;
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    auto dev = BlockDevice::create(kSize);
    auto base = dev.snapshot();
    int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      std::uint64_t sectors = 1 + rng() % 4;
      dev.write(rng() % 8, filled(sectors * kSectorSize, static_cast<std::uint8_t>(i + 1)));
    }
    auto epochs = split_epochs(dev.log()).epochs;
    for (const auto& kept : enumerate_target_subsets(epochs, 0, {})) {
      auto img = build_subset_state(base, epochs, 0, kept, Granularity::op).image;
      std::vector<std::uint8_t> got(16 * kSectorSize);
      img.read(0, got);
      for (std::size_t byte = 0; byte < got.size(); ++byte) {
        std::uint8_t expect = 0;
        for (auto k : kept) {
          const auto& r = epochs[0].records[k];
          if (byte >= r.offset() && byte < r.offset() + r.length) expect = r.bytes()[0];
        }
        ASSERT_EQ(got[byte], expect);
      }
    }
  }
}

}  // namespace
}  // namespace crashsim::crashgen
