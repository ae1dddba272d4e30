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

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pam/index/merge_index.hpp"
#include "pam/pcm/device.hpp"

namespace pam
{
/// Geometry of the two-section leaf tree.
struct TreeConfig {
  std::size_t leaf_fanout{32};   // entry slots per leaf (512 B of entries)
  std::size_t sorted_slots{24};  // head of the leaf; the rest is the unsorted section
  std::size_t inner_fanout{32};
  std::size_t section_align{4};  // sections are multiples of this many slots (4 = one line)
  std::size_t fill_slots{0};     // entries per freshly built leaf; 0 = 80% of fanout, aligned down

  void Validate() const;
  [[nodiscard]] std::size_t FillSlots() const;
  /// Applies one key=value setting; false for foreign keys.
  bool Set(const std::string &key, const std::string &value);
};

/// Keeps the entries of `entries` with min_exclusive < key <= max_inclusive.
/// `from_start` makes the lower bound -infinity.
std::span<const Entry> SliceMake(std::span<const Entry> entries, Key min_exclusive, Key max_inclusive,
                                 bool from_start = false);

/**
 * @brief B+tree with DRAM inner nodes and PCM leaves split into a sorted and an
 * unsorted section, each leaf carrying a validity bitmap.
 *
 * Operations apply immediately. A leaf receives batches through LeafInsert:
 * tombstones clear validity bits; inserts fill an unsorted gap, then unsorted
 * free space, then an order-preserving gap of the sorted section. When no
 * slot is left, or the leaf underflows, the leaf (and a sibling) are rebuilt
 * together with the rest of the batch into fresh leaves at the fill factor.
 *
 * With sorted_slots = 0 every leaf is a plain unsorted leaf (UB+tree layout).
 *
 * PCM layout per leaf: a 64 B header line (validity bitmap, section counts,
 * link to the next leaf) and leaf_fanout * 16 B of entry slots. Inner nodes,
 * the leaf list and mirrors of the headers are DRAM-only.
 */
class PcmBTree : public MergeIndex
{
 public:
  static constexpr std::size_t kMaxSlots = 64;

  PcmBTree(pcm::SimDevice &device, TreeConfig config, std::string name = "sb");
  ~PcmBTree() override;

  PcmBTree(const PcmBTree &) = delete;
  PcmBTree &operator=(const PcmBTree &) = delete;

  [[nodiscard]] std::string_view Name() const override { return name_; }

  void Insert(const Entry &e) override;
  void Delete(Key key) override;
  void BulkInsert(std::span<const Entry> sorted) override;
  std::optional<Entry> PointSearch(Key key) override;
  std::vector<Entry> RangeSearch(Key lo, Key hi) override;
  void Crash() override;
  void Recover() override;
  [[nodiscard]] IndexStats Stats() const override;

  /**
   * @brief Merges a batch sorted by key (tombstones ahead of inserts of the
   * same key) by slicing it along the separators down to the leaves.
   */
  void Bulkload(std::span<const Entry> batch);

  [[nodiscard]] const TreeConfig &Config() const noexcept { return config_; }
  [[nodiscard]] bool Empty() const noexcept { return root_ == nullptr; }

  /// One line per leaf: `leaf <id> sorted=[...] unsorted=[...] invalid=[...]`. Uncharged.
  [[nodiscard]] std::string DumpLeaves() const;

  /// Snapshot of one leaf, for tests. Uncharged.
  struct LeafSnapshot {
    std::vector<Key> sorted;    // valid keys of the sorted section, slot order
    std::vector<Key> unsorted;  // valid keys of the unsorted section, slot order
    std::vector<Key> invalid;   // keys of used-but-invalid slots
    std::size_t sorted_used{0};
    std::size_t unsorted_used{0};
    pcm::Region header;
    pcm::Region slots;
  };
  [[nodiscard]] std::vector<LeafSnapshot> SnapshotLeaves() const;

  /// Separators of the root (sorted part, then unsorted part); empty for a leaf root.
  struct RootSeparators {
    std::vector<Key> sorted;
    std::vector<Key> unsorted;
  };
  [[nodiscard]] RootSeparators RootKeys() const;
  [[nodiscard]] std::size_t Height() const;

 private:
  struct Node;
  struct Leaf;
  struct Inner;
  class LeafView;

  Leaf *Route(Key key) const;
  Key UpperBound(const Node *node) const;
  Leaf *NewLeaf();
  void DestroyLeafRegions(Leaf *leaf);

  void LeafInsert(Leaf *leaf, std::span<const Entry> ops);
  bool TryInsert(LeafView &view, const Entry &e);
  void DeleteFromLeaf(LeafView &view, Key key);
  Leaf *Sibling(Leaf *leaf, bool &is_right) const;

  void Rebuild(std::vector<Leaf *> group, std::span<const Entry> remaining);
  void BuildFresh(std::span<const Entry> batch);
  void RemoveChild(Inner *parent, std::size_t idx);
  void AppendChildren(Inner *parent, std::vector<std::pair<Key, std::unique_ptr<Node>>> children);
  void SplitInner(Inner *node);
  void MaybeConsolidate(Inner *node);
  void SortInner(Inner *node);
  std::size_t ChildIndex(const Inner *parent, const Node *child) const;
  void CollapseRoot();

  void WriteHeader(Leaf *leaf);
  void WriteSuperblock();
  void CollectLeaf(LeafView &view, Key lo, Key hi, std::vector<Entry> &out);

  pcm::SimDevice *device_;
  TreeConfig config_;
  std::string name_;
  pcm::Region superblock_;
  std::unique_ptr<Node> root_;
  Leaf *head_{nullptr};
  std::size_t slot_bytes_{0};

  std::uint64_t splits_{0};
  std::uint64_t merges_{0};
  std::uint64_t absent_tombstones_{0};
};

/// SB+tree: two-section leaves, unbuffered.
std::unique_ptr<PcmBTree> MakeSBTree(pcm::SimDevice &device, TreeConfig config = {});
/// UB+tree: unsorted leaves with a validity bitmap, unbuffered.
std::unique_ptr<PcmBTree> MakeUBTree(pcm::SimDevice &device, TreeConfig config = {});

}  // namespace pam
