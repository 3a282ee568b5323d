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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "crashsim/blockdev/io.hpp"

namespace crashsim::blockdev {

// `.iolog` encoding: per record a u32 byte length followed by
// seq u64, sector u64, length u32, flags u8, checkpoint_id u32, data.
// All integers little-endian. checkpoint_id is 0 when absent.
std::vector<std::uint8_t> encode_iolog(const IoLog& log);
IoLog decode_iolog(std::span<const std::uint8_t> bytes);

void write_iolog_file(const std::filesystem::path& path, const IoLog& log);
IoLog read_iolog_file(const std::filesystem::path& path);

}  // namespace crashsim::blockdev
