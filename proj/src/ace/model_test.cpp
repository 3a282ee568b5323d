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

#include "crashsim/ace/model.hpp"

#include <gtest/gtest.h>

#include <random>

#include "crashsim/fstarget/target.hpp"

namespace crashsim::ace {
namespace {

using fs::FsOp;
using fs::FsOpKind;

// Random ops over a tiny namespace; the model must agree with SoundFS on
// every error value and on the resulting namespace and sizes.
TEST(ModelTest, AgreesWithSoundFs) {
  const std::vector<std::string> paths = {"foo", "bar", "A", "B", "A/foo", "A/bar", "A/C", "A/C/foo", "B/foo"};
  std::mt19937 rng(11);
  const auto& target = fs::find_target("soundfs");
  for (int trial = 0; trial < 60; ++trial) {
    auto dev = blockdev::BlockDevice::create(blockdev::kDefaultDeviceSize);
    target.mkfs(dev);
    auto fsh = std::move(std::get<std::unique_ptr<fs::FsHandle>>(target.mount(std::move(dev))));
    NsModel model;
    for (int step = 0; step < 40; ++step) {
      FsOp op;
      op.kind = static_cast<FsOpKind>(rng() % 18);
      op.path = paths[rng() % paths.size()];
      switch (op.kind) {
        case FsOpKind::write:
        case FsOpKind::dwrite:
        case FsOpKind::mwrite:
        case FsOpKind::falloc:
        case FsOpKind::msync: {
          std::uint64_t b = (rng() % 8) * 2048;
          op.range = fs::ByteRange{b, b + 1 + rng() % 9000};
          op.falloc = fs::all_falloc_modes()[rng() % 5];
          break;
        }
        case FsOpKind::link:
        case FsOpKind::rename:
        case FsOpKind::symlink: op.path2 = paths[rng() % paths.size()]; break;
        case FsOpKind::truncate: op.size = rng() % 20000; break;
        case FsOpKind::xattr:
          op.xattr_action = rng() % 2 ? fs::XattrAction::set : fs::XattrAction::remove;
          op.xattr_name = rng() % 2 ? "user.a" : "user.b";
          op.xattr_value = "v";
          break;
        default: break;
      }
      auto expect = fsh->apply(op, step);
      ASSERT_EQ(model.apply(op), expect) << "trial " << trial << " step " << step << " "
                                         << fs::kind_name(op.kind) << " " << op.path << " " << op.path2;
    }
    auto view = fsh->state_view();
    auto listing = model.listing();
    ASSERT_EQ(listing.size() + 1, view.entries.size());
    for (const auto& [path, ks] : listing) {
      const auto* e = view.find(path);
      ASSERT_TRUE(e) << path;
      EXPECT_EQ(e->kind, ks.first);
      if (ks.first != fs::EntryKind::dir) EXPECT_EQ(e->size, ks.second) << path;
    }
  }
}

}  // namespace
}  // namespace crashsim::ace
