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
#include <vector>

#include "pam/index/merge_index.hpp"
#include "pam/pcm/device.hpp"

namespace pam
{
/// Partition id and row id share the rid field of an entry: pid in the top 16 bits.
constexpr unsigned kPartitionShift = 48;
constexpr Rid kRowMask = (Rid{1} << kPartitionShift) - 1;

constexpr Rid
PackPartitionRid(std::uint32_t pid, Rid rid) noexcept
{
  return (Rid{pid} << kPartitionShift) | (rid & kRowMask);
}
constexpr std::uint32_t
PartitionOf(Rid packed) noexcept
{
  return static_cast<std::uint32_t>(packed >> kPartitionShift);
}
constexpr Rid
RowOf(Rid packed) noexcept
{
  return packed & kRowMask;
}

/**
 * @brief Classic B+-tree with sorted PCM leaves, as used by adaptive merging.
 *
 * Leaves keep their entries sorted and contiguous, so every insert or delete
 * shifts the tail of the leaf and rewrites each line it moves through. A full
 * leaf splits in half. Inner routing is kept in DRAM. Entries may carry a
 * partition id packed into the rid (see PackPartitionRid); the tree itself
 * treats the rid as opaque.
 */
class PartitionedBTree : public MergeIndex
{
 public:
  explicit PartitionedBTree(pcm::SimDevice &device, std::size_t leaf_fanout = 32);
  ~PartitionedBTree() override;

  PartitionedBTree(const PartitionedBTree &) = delete;
  PartitionedBTree &operator=(const PartitionedBTree &) = delete;

  [[nodiscard]] std::string_view Name() const override { return "pbt"; }

  void Insert(const Entry &e) override;
  void Delete(Key key) override;
  /// Inserts the batch one entry at a time.
  void BulkInsert(std::span<const Entry> sorted) override;
  std::optional<Entry> PointSearch(Key key) override;
  std::vector<Entry> RangeSearch(Key lo, Key hi) override;
  void Crash() override;
  void Recover() override;
  [[nodiscard]] IndexStats Stats() const override;

  /// Removes one specific (key, rid) entry; false if absent.
  bool Erase(Key key, Rid rid);

 private:
  struct Leaf {
    pcm::Region header;
    pcm::Region slots;
    std::size_t count{0};
    Leaf *next{nullptr};
  };

  Leaf *NewLeaf();
  void FreeLeaf(Leaf *leaf);
  std::map<Key, std::unique_ptr<Leaf>>::iterator RouteIt(Key key);
  std::vector<Entry> ReadEntries(const Leaf &leaf, std::size_t from, std::size_t to);
  std::size_t LowerBound(const Leaf &leaf, Key key);
  void WriteEntries(const Leaf &leaf, std::size_t from, std::span<const Entry> entries);
  void WriteHeader(const Leaf &leaf);
  void WriteSuperblock();
  void RemoveRange(std::map<Key, std::unique_ptr<Leaf>>::iterator it, std::size_t from, std::size_t to);
  void Split(std::map<Key, std::unique_ptr<Leaf>>::iterator it);

  pcm::SimDevice *device_;
  std::size_t fanout_;
  std::size_t slot_bytes_;
  pcm::Region superblock_;
  std::map<Key, std::unique_ptr<Leaf>> leaves_;  // upper separator (inclusive) -> leaf
  std::uint64_t splits_{0};
  std::uint64_t absent_{0};
};

}  // namespace pam
