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

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pam/framework/interval_set.hpp"
#include "pam/framework/method.hpp"
#include "pam/framework/partition_store.hpp"
#include "pam/index/bbtree.hpp"

namespace pam
{
/// How a partition records that an entry has moved to the index.
enum class Invalidation { kFlag, kBitmap, kJournal };

Invalidation ParseInvalidation(std::string_view name);
std::string_view InvalidationName(Invalidation inv);

struct AmConfig {
  IndexKind index{IndexKind::kPartitioned};
  Invalidation invalidation{Invalidation::kFlag};
  std::size_t pool_capacity{4096};
  std::size_t partition_capacity{PartitionStore::kDefaultCapacity};
  BBTreeConfig tree{};

  bool Set(const std::string &key, const std::string &value);
};

/// Classic adaptive merging: partitioned B+-tree, flag invalidation.
AmConfig MakeAmConfig();
/// The PCM-aware variant: unsorted-leaf B+-tree, per-partition bitmaps.
AmConfig MakeEamConfig();

/// Deletes waiting to be applied; searches filter their results against it.
class MemoryPool
{
 public:
  explicit MemoryPool(std::size_t capacity) : capacity_{capacity} {}

  void Add(Key key) { keys_.insert(key); }
  [[nodiscard]] bool Contains(Key key) const { return keys_.contains(key); }
  bool Remove(Key key) { return keys_.erase(key) > 0; }
  [[nodiscard]] bool Full() const noexcept { return keys_.size() >= capacity_; }
  [[nodiscard]] std::size_t Size() const noexcept { return keys_.size(); }
  [[nodiscard]] std::size_t Capacity() const noexcept { return capacity_; }
  std::vector<Key> TakeAll();

 private:
  std::size_t capacity_;
  std::set<Key> keys_;
};

/**
 * @brief Adaptive merging that moves entries out of partitions by
 * invalidating them in place.
 *
 * A range search merges every still-valid partition entry in range into the
 * index one entry at a time and then marks those entries invalid using the
 * configured strategy. Partition min/max never shrink; a partition is freed
 * once all its entries are invalid. Deletes wait in a memory pool that is
 * applied when full.
 */
class AdaptiveMerging : public AdaptiveMethod
{
 public:
  AdaptiveMerging(pcm::SimDevice &device, AmConfig config, std::string name);

  [[nodiscard]] std::string_view Name() const override { return name_; }

  void Initialize(std::span<const Entry> dataset) override;
  std::vector<Entry> Search(Key lo, Key hi) override;
  void Insert(const Entry &e) override;
  void Delete(Key key) override;
  std::vector<Entry> Lookup(Key key) override;

  [[nodiscard]] bool Converged() const override { return store_.Empty(); }
  [[nodiscard]] std::size_t PartitionCount() const override { return store_.Partitions().size(); }
  [[nodiscard]] IndexStats IndexStatistics() const override { return index_->Stats(); }
  /// Applies pooled deletes and drains index buffers.
  void Sync() override;

  /// Marks the given positions of one partition invalid; the receipt covers only that work.
  pcm::WriteReceipt Invalidate(std::uint32_t id, std::span<const std::size_t> positions);

  /// Applies every pooled delete.
  void DrainPool();

  [[nodiscard]] pcm::Nanos InvalidationTime() const noexcept { return invalidation_ns_; }
  [[nodiscard]] const MemoryPool &Pool() const noexcept { return pool_; }
  [[nodiscard]] PartitionStore &Store() noexcept { return store_; }
  [[nodiscard]] MergeIndex &Index() noexcept { return *index_; }
  [[nodiscard]] const AmConfig &Config() const noexcept { return config_; }

 private:
  struct Marks {
    pcm::Region region;          // flag bytes or bitmap; empty for the journal strategy
    std::vector<bool> invalid;   // DRAM mirror used for visibility
    IntervalSet journal{false};  // positions, journal strategy only
  };

  /// Hits of [lo, hi] in a partition that are still valid; charges the validity check.
  std::vector<PartitionHit> ValidHits(const Partition &p, Key lo, Key hi);
  void ApplyDelete(Key key);
  void ReleaseIfEmpty(std::uint32_t id);
  [[nodiscard]] Entry ToIndex(std::uint32_t pid, const Entry &e) const;
  [[nodiscard]] Entry FromIndex(const Entry &e) const;

  pcm::SimDevice *device_;
  AmConfig config_;
  std::string name_;
  std::unique_ptr<MergeIndex> index_;
  PartitionStore store_;
  std::map<std::uint32_t, Marks> marks_;
  MemoryPool pool_;
  pcm::Nanos invalidation_ns_{0};
};

}  // namespace pam
