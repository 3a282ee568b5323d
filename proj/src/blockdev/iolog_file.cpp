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

#include <fstream>
#include <iterator>

namespace crashsim::blockdev {
namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

  std::uint64_t get(int width) {
    need(width);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += width;
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DeviceError("truncated iolog");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr std::uint32_t kFixedFields = 8 + 8 + 4 + 1 + 4;

}  // namespace

std::vector<std::uint8_t> encode_iolog(const IoLog& log) {
  std::vector<std::uint8_t> out;
  for (const auto& r : log.records()) {
    put_u32(out, kFixedFields + r.length);
    put_u64(out, r.seq);
    put_u64(out, r.sector);
    put_u32(out, r.length);
    put_u8(out, r.flags.bits());
    put_u32(out, r.checkpoint_id.value_or(0));
    auto data = r.bytes();
    out.insert(out.end(), data.begin(), data.end());
  }
  return out;
}

IoLog decode_iolog(std::span<const std::uint8_t> bytes) {
  IoLog log;
  Reader in(bytes);
  while (!in.done()) {
    auto record_len = static_cast<std::uint32_t>(in.get(4));
    std::size_t start = in.pos();
    IoRecord r;
    r.seq = in.get(8);
    r.sector = in.get(8);
    r.length = static_cast<std::uint32_t>(in.get(4));
    r.flags = IoFlagSet::from_bits(static_cast<std::uint8_t>(in.get(1)));
    auto cp = static_cast<std::uint32_t>(in.get(4));
    if (r.flags.checkpoint) r.checkpoint_id = cp;
    else if (cp != 0) throw DeviceError("checkpoint id on a non-checkpoint record");
    if (r.length > 0) r.data = make_payload(in.take(r.length));
    if (in.pos() - start != record_len || record_len != kFixedFields + r.length) {
      throw DeviceError("iolog record length prefix mismatch");
    }
    log.append(std::move(r));
  }
  return log;
}

void write_iolog_file(const std::filesystem::path& path, const IoLog& log) {
  auto bytes = encode_iolog(log);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DeviceError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DeviceError("short write to " + path.string());
}

IoLog read_iolog_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DeviceError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_iolog(bytes);
}

}  // namespace crashsim::blockdev
