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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "pam/framework/interval_set.hpp"
#include "pam/index/entry.hpp"
#include "pam/pcm/device.hpp"

namespace pam
{
/**
 * DRAM descriptor of one sorted partition on PCM. min_pos/max_pos index the
 * smallest and largest entries that are still live; min and max are their keys.
 */
struct Partition {
  std::uint32_t id{0};
  pcm::Region region;
  std::size_t count{0};  // entries written at initialization
  std::size_t min_pos{0};
  std::size_t max_pos{0};
  Key min{0};
  Key max{0};
  std::size_t live{0};

  [[nodiscard]] pcm::Address FirstAddr() const noexcept { return region.base + min_pos * kEntryBytes; }
  [[nodiscard]] pcm::Address LastAddr() const noexcept { return region.base + max_pos * kEntryBytes; }
};

/// Position of an entry inside a partition, as returned by scans.
struct PartitionHit {
  std::size_t pos{0};
  Entry entry;
};

/**
 * @brief The sorted partitions and their persisted directory.
 *
 * Initialization streams the dataset through a sorting buffer of `capacity`
 * entries and writes every full (or final) buffer as one sorted partition.
 * Partition payloads are never rewritten afterwards. A directory region on PCM
 * lists every partition and marks freed ones so the set can be rebuilt after a
 * crash.
 */
class PartitionStore
{
 public:
  static constexpr std::size_t kDefaultCapacity = 65536;

  /// Returns the range of dead keys around k, or nullopt if k is live.
  using DeadRange = std::function<std::optional<KeyRange>(Key)>;

  explicit PartitionStore(pcm::SimDevice &device, std::size_t capacity = kDefaultCapacity);
  ~PartitionStore();

  PartitionStore(const PartitionStore &) = delete;
  PartitionStore &operator=(const PartitionStore &) = delete;

  /// Throws std::logic_error if partitions already exist.
  void Initialize(std::span<const Entry> dataset);

  [[nodiscard]] const std::map<std::uint32_t, Partition> &Partitions() const noexcept { return parts_; }
  [[nodiscard]] Partition *Find(std::uint32_t id);
  [[nodiscard]] std::size_t Capacity() const noexcept { return capacity_; }
  [[nodiscard]] bool Empty() const noexcept { return parts_.empty(); }

  /// Ids of partitions whose [min, max] intersects [lo, hi].
  [[nodiscard]] std::vector<std::uint32_t> Overlapping(Key lo, Key hi) const;

  /// Charged binary search plus scan of the entries with keys in [lo, hi],
  /// restricted to positions [min_pos, max_pos].
  std::vector<PartitionHit> Scan(const Partition &p, Key lo, Key hi);

  /// Charged read of every written entry.
  std::vector<Entry> ReadAll(const Partition &p);

  /// Moves min_pos forward and max_pos backward past dead keys. Returns false
  /// when no live entry remains between them.
  bool AdvanceBounds(Partition &p, const DeadRange &dead);

  /// Frees the region and marks the directory record.
  void Free(std::uint32_t id);

  void Crash() noexcept { parts_.clear(); }
  /// Rebuilds descriptors from the directory with full bounds; live = count.
  void Recover();

 private:
  class Cursor;

  void WriteDirectoryRecord(std::uint32_t id, const Partition &p, bool freed);

  pcm::SimDevice *device_;
  std::size_t capacity_;
  pcm::Region root_;       // fixed address: directory base, length and partition count
  pcm::Region directory_;  // 32 bytes per partition
  std::map<std::uint32_t, Partition> parts_;
};

}  // namespace pam
