/*
 * Copyright 2026 The pam-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "pam/pcm/device.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <new>

#include "pam/simd/line_diff.hpp"

namespace pam::pcm
{
namespace
{
std::uint64_t
ParseUnsigned(const std::string &key, const std::string &value)
{
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception &) {
    throw std::invalid_argument("invalid value for " + key + ": " + value);
  }
  if (pos != value.size()) throw std::invalid_argument("invalid value for " + key + ": " + value);
  return v;
}

template <class T>
T *
CallocArray(std::size_t n)
{
  void *p = std::calloc(n == 0 ? 1 : n, sizeof(T));
  if (p == nullptr) throw std::bad_alloc{};
  return static_cast<T *>(p);
}

}  // namespace

void
DeviceConfig::Validate() const
{
  if (line_size != simd::kLineBytes) throw std::invalid_argument("line_size must be 64");
  if (ranks * rank_width != line_size) throw std::invalid_argument("line_size must equal ranks * rank_width");
  if (read_latency_ns == 0 || write_latency_ns == 0) throw std::invalid_argument("latencies must be positive");
  if (capacity == 0 || capacity % line_size != 0)
    throw std::invalid_argument("capacity must be a positive multiple of line_size");
}

bool
DeviceConfig::Set(const std::string &key, const std::string &value)
{
  if (key == "line_size") {
    line_size = ParseUnsigned(key, value);
  } else if (key == "read_latency_ns") {
    read_latency_ns = ParseUnsigned(key, value);
  } else if (key == "write_latency_ns") {
    write_latency_ns = ParseUnsigned(key, value);
  } else if (key == "ranks") {
    ranks = ParseUnsigned(key, value);
  } else if (key == "rank_width") {
    rank_width = ParseUnsigned(key, value);
  } else if (key == "write_bandwidth") {
    write_bandwidth = ParseUnsigned(key, value);
  } else if (key == "capacity_bytes") {
    capacity = ParseUnsigned(key, value);
  } else {
    return false;
  }
  return true;
}

void
SimDevice::FreeDeleter::operator()(void *p) const noexcept
{
  std::free(p);
}

SimDevice::SimDevice(DeviceConfig config) : config_{config}
{
  config_.Validate();
  line_count_ = config_.capacity / config_.line_size;
  // calloc so untouched pages stay unmapped; large devices cost nothing until used
  contents_.reset(CallocArray<std::byte>(config_.capacity));
  wear_bits_buf_.reset(CallocArray<std::uint64_t>(line_count_));
  wear_writes_buf_.reset(CallocArray<std::uint32_t>(line_count_));
  wear_bits_ = {wear_bits_buf_.get(), line_count_};
  wear_writes_ = {wear_writes_buf_.get(), line_count_};
}

SimDevice::~SimDevice() = default;
SimDevice::SimDevice(SimDevice &&) noexcept = default;
SimDevice &SimDevice::operator=(SimDevice &&) noexcept = default;

Region
SimDevice::Alloc(std::size_t size)
{
  if (size == 0) throw std::invalid_argument("alloc of zero bytes");
  const auto line = config_.line_size;
  const std::size_t rounded = (size + line - 1) / line * line;

  Address base{};
  if (auto it = free_by_size_.find(rounded); it != free_by_size_.end() && !it->second.empty()) {
    base = it->second.back();
    it->second.pop_back();
    std::memset(contents_.get() + base, 0, rounded);
  } else {
    if (rounded > config_.capacity - bump_) {
      throw AllocationError("PCM device out of capacity (" + std::to_string(rounded) + " bytes requested)");
    }
    base = bump_;
    bump_ += rounded;
  }
  live_.emplace(base, rounded);
  bytes_in_use_ += rounded;
  return Region{base, rounded};
}

void
SimDevice::Free(const Region &region)
{
  auto it = live_.find(region.base);
  if (it == live_.end() || it->second != region.length) throw AccessViolation("free of a region that is not live");
  live_.erase(it);
  bytes_in_use_ -= region.length;
  free_by_size_[region.length].push_back(region.base);
}

bool
SimDevice::IsLive(const Region &region) const
{
  auto it = live_.find(region.base);
  return it != live_.end() && it->second == region.length;
}

void
SimDevice::CheckAccess(const Region &region, std::size_t offset, std::size_t len) const
{
  if (!IsLive(region)) throw AccessViolation("access to a region that is not live");
  if (offset > region.length || len > region.length - offset) {
    throw AccessViolation("access beyond region bounds");
  }
}

void
SimDevice::Read(const Region &region, std::size_t offset, std::span<std::byte> out)
{
  CheckAccess(region, offset, out.size());
  if (out.empty()) return;
  const Address addr = region.base + offset;
  std::memcpy(out.data(), contents_.get() + addr, out.size());
  const auto line = config_.line_size;
  const std::uint64_t lines = (addr + out.size() - 1) / line - addr / line + 1;
  reads_ += lines;
  sim_time_ += lines * config_.read_latency_ns;
}

void
SimDevice::Peek(const Region &region, std::size_t offset, std::span<std::byte> out) const
{
  CheckAccess(region, offset, out.size());
  if (!out.empty()) std::memcpy(out.data(), contents_.get() + region.base + offset, out.size());
}

WriteReceipt
SimDevice::Write(const Region &region, std::size_t offset, std::span<const std::byte> data)
{
  CheckAccess(region, offset, data.size());
  WriteReceipt receipt{};
  if (data.empty()) return receipt;

  const auto line = config_.line_size;
  const Address first = region.base + offset;
  const Address last = first + data.size();  // exclusive
  std::array<std::byte, simd::kLineBytes> image{};

  for (Address line_base = first / line * line; line_base < last; line_base += line) {
    std::byte *stored = contents_.get() + line_base;
    const Address lo = std::max(first, line_base);
    const Address hi = std::min(last, line_base + line);

    std::memcpy(image.data(), stored, line);
    std::memcpy(image.data() + (lo - line_base), data.data() + (lo - first), hi - lo);

    const auto diff = simd::DiffLine(stored, image.data());
    if (diff.modified_words == 0) continue;

    std::memcpy(stored, image.data(), line);
    const std::size_t idx = line_base / line;
    wear_bits_[idx] += diff.modified_bits;
    wear_writes_[idx] += 1;
    receipt.lines_flushed += 1;
    receipt.words_modified += diff.modified_words;
    receipt.bits_modified += diff.modified_bits;
  }
  receipt.cost_ns = receipt.lines_flushed * config_.write_latency_ns;

  line_flushes_ += receipt.lines_flushed;
  words_modified_ += receipt.words_modified;
  bits_modified_ += receipt.bits_modified;
  sim_time_ += receipt.cost_ns;
  return receipt;
}

DeviceStats
SimDevice::Stats() const
{
  DeviceStats s{};
  s.reads = reads_;
  s.line_flushes = line_flushes_;
  s.words_modified = words_modified_;
  s.bits_modified = bits_modified_;
  s.sim_time_ns = sim_time_;
  s.wear_histogram.assign(65, 0);
  // only the allocated prefix can carry wear
  const std::size_t used_lines = bump_ / config_.line_size;
  for (std::size_t i = 0; i < used_lines; ++i) {
    const auto w = wear_bits_[i];
    s.max_line_wear = std::max(s.max_line_wear, w);
    s.wear_histogram[static_cast<std::size_t>(std::bit_width(w))] += 1;
  }
  s.wear_histogram[0] += line_count_ - used_lines;
  return s;
}

void
SimDevice::ResetStats() noexcept
{
  reads_ = 0;
  line_flushes_ = 0;
  words_modified_ = 0;
  bits_modified_ = 0;
  sim_time_ = 0;
}

std::uint64_t
SimDevice::LineWearBits(std::size_t line) const
{
  if (line >= line_count_) throw std::out_of_range("line outside the device");
  return wear_bits_[line];
}

std::uint64_t
SimDevice::LineWearWrites(std::size_t line) const
{
  if (line >= line_count_) throw std::out_of_range("line outside the device");
  return wear_writes_[line];
}

}  // namespace pam::pcm
