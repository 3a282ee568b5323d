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

#include <sstream>

namespace crashsim::crashgen {

using blockdev::CheckpointId;
using blockdev::ImageWriter;
using blockdev::IoRecord;
using blockdev::kSectorSize;

std::string to_string(Granularity g) { return g == Granularity::op ? "op" : "sector"; }

Granularity parse_granularity(const std::string& text) {
  if (text == "op") return Granularity::op;
  if (text == "sector") return Granularity::sector;
  throw CrashgenError("unknown granularity '" + text + "'");
}

std::string SubsetDescriptor::to_string() const {
  std::string out = "prefix=" + std::to_string(prefix_count) + ";kept=";
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(kept[i]);
  }
  out += ";gran=" + crashgen::to_string(granularity);
  return out;
}

SubsetDescriptor SubsetDescriptor::parse(const std::string& text) {
  SubsetDescriptor d;
  bool have_prefix = false, have_kept = false, have_gran = false;
  std::stringstream ss(text);
  std::string field;
  try {
    while (std::getline(ss, field, ';')) {
      auto eq = field.find('=');
      if (eq == std::string::npos) throw CrashgenError("malformed descriptor field '" + field + "'");
      auto key = field.substr(0, eq);
      auto value = field.substr(eq + 1);
      if (key == "prefix") {
        d.prefix_count = std::stoull(value);
        have_prefix = true;
      } else if (key == "kept") {
        std::stringstream ks(value);
        std::string item;
        while (std::getline(ks, item, ',')) d.kept.push_back(std::stoull(item));
        have_kept = true;
      } else if (key == "gran") {
        d.granularity = parse_granularity(value);
        have_gran = true;
      } else {
        throw CrashgenError("unknown descriptor key '" + key + "'");
      }
    }
  } catch (const std::logic_error&) {
    throw CrashgenError("malformed descriptor '" + text + "'");
  }
  if (!have_prefix || !have_kept || !have_gran) {
    throw CrashgenError("incomplete descriptor '" + text + "'");
  }
  for (std::size_t i = 1; i < d.kept.size(); ++i) {
    if (d.kept[i] <= d.kept[i - 1]) throw CrashgenError("kept indices must increase");
  }
  return d;
}

CheckpointStates crash_states_at_checkpoints(const DiskImage& base, const IoLog& log) {
  CheckpointStates out;
  if (log.checkpoint_count() == 0) {
    out.warning = "workload has no persistence point; no crash states generated";
    return out;
  }
  // Single forward pass; each checkpoint snapshots the running image.
  ImageWriter writer(base);
  for (const auto& r : log.records()) {
    if (r.is_write()) writer.write(r.offset(), r.bytes());
    if (r.flags.checkpoint) out.states.push_back({writer.snapshot(), *r.checkpoint_id, {}});
  }
  return out;
}

std::vector<Unit> epoch_units(const Epoch& epoch, Granularity g) {
  std::vector<Unit> units;
  auto add = [&](const IoRecord& r, std::size_t element, bool split) {
    if (!r.is_write()) return;
    if (!split) {
      units.push_back({element, r.offset(), 0, r.length});
      return;
    }
    for (std::uint64_t b = 0; b < r.length; b += kSectorSize) {
      units.push_back({element, r.offset() + b, b, kSectorSize});
    }
  };
  for (std::size_t i = 0; i < epoch.records.size(); ++i) {
    add(epoch.records[i], i, g == Granularity::sector);
  }
  if (epoch.terminator) add(*epoch.terminator, epoch.records.size(), false);
  return units;
}

namespace {

void check_prefix(const std::vector<Epoch>& epochs, std::size_t prefix_count) {
  if (prefix_count >= epochs.size()) {
    throw CrashgenError("prefix count " + std::to_string(prefix_count) + " out of range for " +
                        std::to_string(epochs.size()) + " epochs");
  }
}

// Digit radices for the selector's subset model over `units`.
std::vector<std::size_t> radices(const std::vector<Unit>& units, const SubsetSelector& sel) {
  std::vector<std::size_t> radix;
  if (sel.granularity == Granularity::sector && sel.contiguous_prefix) {
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (i == 0 || units[i].element != units[i - 1].element) radix.push_back(1);
      ++radix.back();
    }
  } else {
    radix.assign(units.size(), 2);
  }
  return radix;
}

}  // namespace

SubsetEnumerator::SubsetEnumerator(const std::vector<Epoch>& epochs, std::size_t prefix_count,
                                   const SubsetSelector& selector)
    : selector_(selector), rng_(selector.seed) {
  check_prefix(epochs, prefix_count);
  units_ = epoch_units(epochs[prefix_count], selector.granularity);
  radix_ = radices(units_, selector);
  digits_.assign(radix_.size(), 0);
  if (selector_.mode == SubsetSelector::Mode::random) {
    std::uint64_t space = 1;
    for (auto r : radix_) {
      if (space > selector_.count) break;
      space *= r;
    }
    random_all_ = space <= selector_.count;
  }
}

std::vector<std::size_t> SubsetEnumerator::decode(const std::vector<std::size_t>& digits) const {
  std::vector<std::size_t> kept;
  if (selector_.granularity == Granularity::sector && selector_.contiguous_prefix) {
    std::size_t base = 0;
    for (std::size_t g = 0; g < radix_.size(); ++g) {
      for (std::size_t k = 0; k < digits[g]; ++k) kept.push_back(base + k);
      base += radix_[g] - 1;
    }
  } else {
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (digits[i]) kept.push_back(i);
    }
  }
  return kept;
}

std::optional<std::vector<std::size_t>> SubsetEnumerator::next_exhaustive() {
  if (exhausted_) return std::nullopt;
  auto kept = decode(digits_);
  // Counter with digit 0 varying fastest, so unit 0 toggles first.
  std::size_t i = 0;
  for (; i < digits_.size(); ++i) {
    if (++digits_[i] < radix_[i]) break;
    digits_[i] = 0;
  }
  if (i == digits_.size()) exhausted_ = true;
  return kept;
}

std::vector<std::size_t> SubsetEnumerator::draw_random() {
  std::vector<std::size_t> digits(radix_.size());
  for (std::size_t i = 0; i < radix_.size(); ++i) {
    digits[i] = std::uniform_int_distribution<std::size_t>(0, radix_[i] - 1)(rng_);
  }
  return decode(digits);
}

std::optional<std::vector<std::size_t>> SubsetEnumerator::next() {
  if (selector_.mode == SubsetSelector::Mode::exhaustive || random_all_) {
    return next_exhaustive();
  }
  if (emitted_ >= selector_.count) return std::nullopt;
  for (;;) {
    auto kept = draw_random();
    if (seen_.insert(kept).second) {
      ++emitted_;
      return kept;
    }
  }
}

std::uint64_t subset_space(const std::vector<Epoch>& epochs, std::size_t prefix_count,
                           const SubsetSelector& selector, std::uint64_t cap) {
  check_prefix(epochs, prefix_count);
  auto units = epoch_units(epochs[prefix_count], selector.granularity);
  std::uint64_t space = 1;
  for (auto r : radices(units, selector)) {
    if (space >= cap) return cap;
    space *= r;
  }
  return std::min(space, cap);
}

std::vector<std::vector<std::size_t>> enumerate_target_subsets(
    const std::vector<Epoch>& epochs, std::size_t prefix_count, const SubsetSelector& selector) {
  SubsetEnumerator e(epochs, prefix_count, selector);
  std::vector<std::vector<std::size_t>> out;
  while (auto kept = e.next()) out.push_back(std::move(*kept));
  return out;
}

CrashState build_subset_state(const DiskImage& base, const std::vector<Epoch>& epochs,
                              std::size_t prefix_count, const std::vector<std::size_t>& kept,
                              Granularity g) {
  if (prefix_count > epochs.size() || (prefix_count == epochs.size() && !kept.empty())) {
    throw CrashgenError("prefix count out of range");
  }
  ImageWriter writer(base);
  auto apply = [&](const IoRecord& r) {
    if (r.is_write()) writer.write(r.offset(), r.bytes());
  };
  for (std::size_t e = 0; e < prefix_count; ++e) {
    for (const auto& r : epochs[e].records) apply(r);
    if (epochs[e].terminator) apply(*epochs[e].terminator);
  }
  if (prefix_count < epochs.size()) {
    const Epoch& target = epochs[prefix_count];
    auto units = epoch_units(target, g);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (kept[i] >= units.size() || (i > 0 && kept[i] <= kept[i - 1])) {
        throw CrashgenError("invalid kept subset");
      }
      const Unit& u = units[kept[i]];
      const IoRecord& r =
          u.element < target.records.size() ? target.records[u.element] : *target.terminator;
      writer.write(u.offset, r.bytes().subspan(u.byte_begin, u.length));
    }
  }
  return {writer.snapshot(), 0, SubsetDescriptor{prefix_count, kept, g}};
}

}  // namespace crashsim::crashgen
