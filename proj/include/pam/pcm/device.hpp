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
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pam::pcm
{
/// Device address (byte offset into the simulated PCM address space).
using Address = std::uint64_t;
using Nanos = std::uint64_t;

class AllocationError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

class AccessViolation : public std::out_of_range
{
 public:
  using std::out_of_range::out_of_range;
};

/**
 * @brief Geometry and latencies of the simulated PCM device.
 *
 * Defaults: 64 B lines served by eight 8 B ranks, 50 ns line read,
 * 1 us line write, 64 MB/s write bandwidth per die.
 */
struct DeviceConfig {
  std::size_t line_size{64};
  Nanos read_latency_ns{50};
  Nanos write_latency_ns{1000};
  std::size_t ranks{8};
  std::size_t rank_width{8};
  std::uint64_t write_bandwidth{64'000'000};  // bytes/s per die; reported only
  std::size_t capacity{std::size_t{256} << 20};

  /// Throws std::invalid_argument when an invariant does not hold.
  void Validate() const;

  /// Applies one `key=value` setting. Returns false for keys this struct does not own.
  bool Set(const std::string &key, const std::string &value);
};

/// A line-aligned span of device memory handed out by SimDevice::Alloc.
struct Region {
  Address base{0};
  std::size_t length{0};

  [[nodiscard]] bool Empty() const noexcept { return length == 0; }
  [[nodiscard]] Address End() const noexcept { return base + length; }
  friend constexpr bool operator==(const Region &, const Region &) = default;
};

struct WriteReceipt {
  std::uint64_t lines_flushed{0};
  std::uint64_t words_modified{0};
  std::uint64_t bits_modified{0};
  Nanos cost_ns{0};

  WriteReceipt &operator+=(const WriteReceipt &o) noexcept
  {
    lines_flushed += o.lines_flushed;
    words_modified += o.words_modified;
    bits_modified += o.bits_modified;
    cost_ns += o.cost_ns;
    return *this;
  }
};

struct DeviceStats {
  std::uint64_t reads{0};  // line reads
  std::uint64_t line_flushes{0};
  std::uint64_t words_modified{0};
  std::uint64_t bits_modified{0};
  Nanos sim_time_ns{0};
  std::uint64_t max_line_wear{0};  // bits, over the whole lifetime of the device
  /// wear_histogram[i] = number of lines whose lifetime wear lies in [2^(i-1), 2^i); [0] = untouched
  std::vector<std::uint64_t> wear_histogram;
};

/**
 * @brief Byte-addressable PCM model with data-comparison writes.
 *
 * Every write diffs the new line images against the stored ones. A line with at
 * least one modified word is flushed at the cost of one write latency; the eight
 * ranks service the whole line in parallel, and distinct lines serialize.
 * Unmodified lines cost nothing and add no wear. Reads cost one read latency
 * per distinct line touched.
 *
 * Single-threaded. Experiments running in parallel must use separate devices.
 */
class SimDevice
{
 public:
  explicit SimDevice(DeviceConfig config = {});
  ~SimDevice();

  SimDevice(const SimDevice &) = delete;
  SimDevice &operator=(const SimDevice &) = delete;
  SimDevice(SimDevice &&) noexcept;
  SimDevice &operator=(SimDevice &&) noexcept;

  /// Zero-filled, line-aligned region; zero-filling is free. Throws AllocationError.
  Region Alloc(std::size_t size);
  void Free(const Region &region);

  /// Charged read of `out.size()` bytes at `offset` within a live region.
  void Read(const Region &region, std::size_t offset, std::span<std::byte> out);

  /// Charged data-comparison write within a live region.
  WriteReceipt Write(const Region &region, std::size_t offset, std::span<const std::byte> data);

  /// Uncharged access for debugging and test oracles.
  void Peek(const Region &region, std::size_t offset, std::span<std::byte> out) const;

  [[nodiscard]] DeviceStats Stats() const;
  /// Zeroes counters and simulated time; contents and wear map are kept.
  void ResetStats() noexcept;

  [[nodiscard]] Nanos SimTime() const noexcept { return sim_time_; }
  [[nodiscard]] const DeviceConfig &Config() const noexcept { return config_; }
  [[nodiscard]] std::size_t LineCount() const noexcept { return line_count_; }
  /// Lifetime wear of one line. Throws std::out_of_range.
  [[nodiscard]] std::uint64_t LineWearBits(std::size_t line) const;
  [[nodiscard]] std::uint64_t LineWearWrites(std::size_t line) const;
  [[nodiscard]] std::size_t BytesInUse() const noexcept { return bytes_in_use_; }
  [[nodiscard]] bool IsLive(const Region &region) const;

 private:
  struct FreeDeleter {
    void operator()(void *p) const noexcept;
  };

  void CheckAccess(const Region &region, std::size_t offset, std::size_t len) const;

  DeviceConfig config_;
  std::size_t line_count_{0};
  std::unique_ptr<std::byte, FreeDeleter> contents_;
  std::unique_ptr<std::uint64_t, FreeDeleter> wear_bits_buf_;
  std::unique_ptr<std::uint32_t, FreeDeleter> wear_writes_buf_;
  std::span<std::uint64_t> wear_bits_;
  std::span<std::uint32_t> wear_writes_;

  Address bump_{0};
  std::size_t bytes_in_use_{0};
  std::map<Address, std::size_t> live_;                        // base -> length
  std::map<std::size_t, std::vector<Address>> free_by_size_;  // length -> bases

  std::uint64_t reads_{0};
  std::uint64_t line_flushes_{0};
  std::uint64_t words_modified_{0};
  std::uint64_t bits_modified_{0};
  Nanos sim_time_{0};
};

}  // namespace pam::pcm
