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

#include "crashsim/blockdev/iolog_file.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "crashsim/blockdev/device.hpp"

namespace crashsim::blockdev {
namespace {

IoLog sample_log() {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  std::vector<std::uint8_t> data(1024);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint8_t>(i * 7);
  dev.write(3, data);
  dev.flush();
  dev.write(100, std::vector<std::uint8_t>(512, 0xEE), true);
  dev.insert_checkpoint();
  return dev.log();
}

TEST(IoLogFileTest, RoundTripIsBitExact) {
  auto log = sample_log();
  auto bytes = encode_iolog(log);
  auto back = decode_iolog(bytes);
  EXPECT_EQ(back, log);
  EXPECT_EQ(encode_iolog(back), bytes);
}

TEST(IoLogFileTest, LayoutOfCheckpointRecord) {
  auto dev = BlockDevice::create(kDefaultDeviceSize);
  dev.insert_checkpoint();
  auto bytes = encode_iolog(dev.log());
  ASSERT_EQ(bytes.size(), 4u + 25u);
  EXPECT_EQ(bytes[0], 25);
  EXPECT_EQ(bytes[4], 1);          // seq low byte
  EXPECT_EQ(bytes[4 + 20], 0x08);  // flags: checkpoint bit
  EXPECT_EQ(bytes[4 + 21], 1);     // checkpoint id
}

TEST(IoLogFileTest, TruncatedInputRejected) {
  auto bytes = encode_iolog(sample_log());
  bytes.pop_back();
  EXPECT_THROW(decode_iolog(bytes), DeviceError);
}

TEST(IoLogFileTest, FileRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "crashsim_iolog_test.iolog";
  auto log = sample_log();
  write_iolog_file(path, log);
  EXPECT_EQ(read_iolog_file(path), log);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace crashsim::blockdev
