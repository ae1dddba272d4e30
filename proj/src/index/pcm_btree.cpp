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
#include "pam/index/pcm_btree.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace pam
{
namespace
{
constexpr std::size_t kLineBytes = 64;
constexpr std::size_t kSlotsPerLine = kLineBytes / kEntryBytes;
constexpr std::uint64_t kNoAddress = ~std::uint64_t{0};

std::size_t
ParseSize(const std::string &key, const std::string &value)
{
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception &) {
    throw std::invalid_argument("invalid value for " + key + ": " + value);
  }
  if (pos != value.size()) throw std::invalid_argument("invalid value for " + key + ": " + value);
  return static_cast<std::size_t>(v);
}

template <class T>
void
Store(std::byte *p, T v) noexcept
{
  std::memcpy(p, &v, sizeof(T));
}

template <class T>
T
Load(const std::byte *p) noexcept
{
  T v{};
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace

/*##################################################################################################
 * Configuration
 *################################################################################################*/

void
TreeConfig::Validate() const
{
  if (leaf_fanout < 2 || leaf_fanout > PcmBTree::kMaxSlots)
    throw std::invalid_argument("leaf_fanout must be within [2, 64]");
  if (section_align == 0 || leaf_fanout % section_align != 0)
    throw std::invalid_argument("leaf_fanout must be a multiple of the section alignment");
  if (sorted_slots > leaf_fanout || sorted_slots % section_align != 0)
    throw std::invalid_argument("sorted_slots must be an aligned count not above leaf_fanout");
  if (inner_fanout < 2) throw std::invalid_argument("inner_fanout must be at least 2");
  if (fill_slots > leaf_fanout) throw std::invalid_argument("fill_slots exceeds leaf_fanout");
}

std::size_t
TreeConfig::FillSlots() const
{
  if (fill_slots != 0) return fill_slots;
  // 80% of the leaf, aligned down to whole sections
  const std::size_t raw = leaf_fanout * 4 / 5;
  const std::size_t aligned = raw / section_align * section_align;
  return std::max<std::size_t>({aligned, leaf_fanout / 2, 1});
}

bool
TreeConfig::Set(const std::string &key, const std::string &value)
{
  if (key == "leaf_fanout") {
    leaf_fanout = ParseSize(key, value);
  } else if (key == "sorted_slots") {
    sorted_slots = ParseSize(key, value);
  } else if (key == "inner_fanout") {
    inner_fanout = ParseSize(key, value);
  } else if (key == "section_align") {
    section_align = ParseSize(key, value);
  } else if (key == "fill_slots") {
    fill_slots = ParseSize(key, value);
  } else {
    return false;
  }
  return true;
}

std::span<const Entry>
SliceMake(std::span<const Entry> entries, Key min_exclusive, Key max_inclusive, bool from_start)
{
  auto first = entries.begin();
  if (!from_start) {
    first = std::upper_bound(entries.begin(), entries.end(), min_exclusive,
                             [](Key k, const Entry &e) { return k < e.key; });
  }
  auto last = std::upper_bound(first, entries.end(), max_inclusive,
                               [](Key k, const Entry &e) { return k < e.key; });
  if (first > last) last = first;
  return {first, last};
}

/*##################################################################################################
 * Node types
 *################################################################################################*/

struct PcmBTree::Node {
  explicit Node(bool leaf) : is_leaf{leaf} {}
  virtual ~Node() = default;

  bool is_leaf;
  Inner *parent{nullptr};
};

struct PcmBTree::Leaf final : PcmBTree::Node {
  Leaf() : Node{true} {}

  [[nodiscard]] std::size_t ValidCount() const noexcept { return static_cast<std::size_t>(std::popcount(valid)); }
  [[nodiscard]] bool IsValid(std::size_t slot) const noexcept { return (valid >> slot) & 1U; }

  pcm::Region header;
  pcm::Region slots;
  std::uint64_t valid{0};  // DRAM mirror of the persisted bitmap
  std::uint16_t sorted_used{0};
  std::uint16_t unsorted_used{0};
  Leaf *prev{nullptr};
  Leaf *next{nullptr};
};

struct PcmBTree::Inner final : PcmBTree::Node {
  Inner() : Node{false} {}

  std::vector<Key> seps;  // [0, sorted_count) sorted, then an append-only unsorted part
  std::vector<std::unique_ptr<Node>> children;
  std::size_t sorted_count{0};
};

/**
 * Working copy of one leaf's slots for the duration of an operation. Lines are
 * read from PCM on first touch; dirty lines and the header go back on Flush.
 */
class PcmBTree::LeafView
{
 public:
  LeafView(PcmBTree &tree, Leaf &leaf) : tree_{&tree}, leaf_{&leaf} {}

  [[nodiscard]] Leaf &leaf() const noexcept { return *leaf_; }

  const Entry &At(std::size_t slot)
  {
    Load(slot / kSlotsPerLine);
    return slots_[slot];
  }
  Key KeyAt(std::size_t slot) { return At(slot).key; }

  void Put(std::size_t slot, const Entry &e)
  {
    const auto line = slot / kSlotsPerLine;
    Load(line);
    slots_[slot] = Entry{e.key, e.rid, false};
    dirty_ |= 1U << line;
  }

  /// Treat every line as already present (fresh leaf or full overwrite).
  void AssumeLoaded(std::size_t line) noexcept { loaded_ |= 1U << line; }

  void Flush()
  {
    std::array<std::byte, kLineBytes> buf{};
    for (std::uint32_t d = dirty_; d != 0; d &= d - 1) {
      const auto line = static_cast<std::size_t>(std::countr_zero(d));
      for (std::size_t i = 0; i < kSlotsPerLine; ++i) {
        EncodeEntry(slots_[line * kSlotsPerLine + i],
                    std::span<std::byte, kEntryBytes>{buf.data() + i * kEntryBytes, kEntryBytes});
      }
      tree_->device_->Write(leaf_->slots, line * kLineBytes, buf);
    }
    dirty_ = 0;
    tree_->WriteHeader(leaf_);
  }

 private:
  void Load(std::size_t line)
  {
    if ((loaded_ >> line) & 1U) return;
    std::array<std::byte, kLineBytes> buf{};
    tree_->device_->Read(leaf_->slots, line * kLineBytes, buf);
    for (std::size_t i = 0; i < kSlotsPerLine; ++i) {
      slots_[line * kSlotsPerLine + i] =
          DecodeEntry(std::span<const std::byte, kEntryBytes>{buf.data() + i * kEntryBytes, kEntryBytes});
    }
    loaded_ |= 1U << line;
  }

  PcmBTree *tree_;
  Leaf *leaf_;
  std::array<Entry, kMaxSlots> slots_{};
  std::uint32_t loaded_{0};
  std::uint32_t dirty_{0};
};

namespace
{
/// First slot of the sorted section whose physical key is >= key. Binary search
/// that consumes a whole cache line per probe.
template <class View>
std::size_t
LowerBoundSorted(View &view, std::size_t used, Key key)
{
  std::size_t lo = 0;
  std::size_t hi = used;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const std::size_t line_first = mid / kSlotsPerLine * kSlotsPerLine;
    const std::size_t a = std::max(lo, line_first);
    const std::size_t b = std::min(hi, line_first + kSlotsPerLine);
    if (view.KeyAt(b - 1) < key) {
      lo = b;
    } else if (view.KeyAt(a) >= key) {
      hi = a;
    } else {
      std::size_t s = a + 1;
      while (view.KeyAt(s) < key) ++s;
      return s;
    }
  }
  return lo;
}

}  // namespace

/*##################################################################################################
 * Construction
 *################################################################################################*/

PcmBTree::PcmBTree(pcm::SimDevice &device, TreeConfig config, std::string name)
    : device_{&device}, config_{config}, name_{std::move(name)}
{
  config_.Validate();
  slot_bytes_ = (config_.leaf_fanout * kEntryBytes + kLineBytes - 1) / kLineBytes * kLineBytes;
  superblock_ = device_->Alloc(kLineBytes);
  WriteSuperblock();
}

PcmBTree::~PcmBTree()
{
  for (Leaf *l = head_; l != nullptr; l = l->next) DestroyLeafRegions(l);
  if (device_->IsLive(superblock_)) device_->Free(superblock_);
}

std::unique_ptr<PcmBTree>
MakeSBTree(pcm::SimDevice &device, TreeConfig config)
{
  return std::make_unique<PcmBTree>(device, config, "sb");
}

std::unique_ptr<PcmBTree>
MakeUBTree(pcm::SimDevice &device, TreeConfig config)
{
  config.sorted_slots = 0;
  return std::make_unique<PcmBTree>(device, config, "ub");
}

PcmBTree::Leaf *
PcmBTree::NewLeaf()
{
  auto *leaf = new Leaf{};
  leaf->header = device_->Alloc(kLineBytes);
  leaf->slots = device_->Alloc(slot_bytes_);
  return leaf;
}

void
PcmBTree::DestroyLeafRegions(Leaf *leaf)
{
  if (device_->IsLive(leaf->header)) device_->Free(leaf->header);
  if (device_->IsLive(leaf->slots)) device_->Free(leaf->slots);
}

void
PcmBTree::WriteHeader(Leaf *leaf)
{
  std::array<std::byte, 40> buf{};
  Store(buf.data(), leaf->valid);
  Store(buf.data() + 8, leaf->sorted_used);
  Store(buf.data() + 10, leaf->unsorted_used);
  Store(buf.data() + 16, leaf->next != nullptr ? leaf->next->header.base : kNoAddress);
  Store(buf.data() + 24, leaf->next != nullptr ? leaf->next->slots.base : kNoAddress);
  device_->Write(leaf->header, 0, buf);
}

void
PcmBTree::WriteSuperblock()
{
  std::array<std::byte, 16> buf{};
  Store(buf.data(), head_ != nullptr ? head_->header.base : kNoAddress);
  Store(buf.data() + 8, head_ != nullptr ? head_->slots.base : kNoAddress);
  device_->Write(superblock_, 0, buf);
}

/*##################################################################################################
 * Routing
 *################################################################################################*/

PcmBTree::Leaf *
PcmBTree::Route(Key key) const
{
  Node *node = root_.get();
  while (node != nullptr && !node->is_leaf) {
    auto *inner = static_cast<Inner *>(node);
    const auto sorted_end = inner->seps.begin() + static_cast<std::ptrdiff_t>(inner->sorted_count);
    std::size_t best = inner->seps.size();
    auto it = std::lower_bound(inner->seps.begin(), sorted_end, key);
    if (it != sorted_end) best = static_cast<std::size_t>(it - inner->seps.begin());
    for (std::size_t i = inner->sorted_count; i < inner->seps.size(); ++i) {
      if (inner->seps[i] >= key && (best == inner->seps.size() || inner->seps[i] < inner->seps[best])) best = i;
    }
    if (best == inner->seps.size()) {
      // past every separator: only possible for the rightmost path
      best = static_cast<std::size_t>(std::max_element(inner->seps.begin(), inner->seps.end()) - inner->seps.begin());
    }
    node = inner->children[best].get();
  }
  return static_cast<Leaf *>(node);
}

std::size_t
PcmBTree::ChildIndex(const Inner *parent, const Node *child) const
{
  for (std::size_t i = 0; i < parent->children.size(); ++i) {
    if (parent->children[i].get() == child) return i;
  }
  throw std::logic_error("child not found in parent");
}

Key
PcmBTree::UpperBound(const Node *node) const
{
  if (node->parent == nullptr) return kKeyInfinity;
  const Inner *parent = node->parent;
  const Key sep = parent->seps[ChildIndex(parent, node)];
  // the largest child also receives every key routed to its parent above that separator
  if (sep == *std::max_element(parent->seps.begin(), parent->seps.end())) return std::max(sep, UpperBound(parent));
  return sep;
}

PcmBTree::Leaf *
PcmBTree::Sibling(Leaf *leaf, bool &is_right) const
{
  if (leaf->parent == nullptr) return nullptr;
  if (leaf->next != nullptr && leaf->next->parent == leaf->parent) {
    is_right = true;
    return leaf->next;
  }
  if (leaf->prev != nullptr && leaf->prev->parent == leaf->parent) {
    is_right = false;
    return leaf->prev;
  }
  return nullptr;
}

/*##################################################################################################
 * Inner node maintenance (DRAM only)
 *################################################################################################*/

void
PcmBTree::SortInner(Inner *node)
{
  std::vector<std::size_t> order(node->seps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return node->seps[a] < node->seps[b]; });
  std::vector<Key> seps;
  std::vector<std::unique_ptr<Node>> children;
  for (auto i : order) {
    seps.push_back(node->seps[i]);
    children.push_back(std::move(node->children[i]));
  }
  node->seps = std::move(seps);
  node->children = std::move(children);
  node->sorted_count = node->seps.size();
}

void
PcmBTree::MaybeConsolidate(Inner *node)
{
  const std::size_t unsorted = node->seps.size() - node->sorted_count;
  if (unsorted > std::max<std::size_t>(1, config_.inner_fanout / 4)) SortInner(node);
}

void
PcmBTree::AppendChildren(Inner *parent, std::vector<std::pair<Key, std::unique_ptr<Node>>> children)
{
  if (children.empty()) return;
  for (auto &[sep, child] : children) {
    child->parent = parent;
    parent->seps.push_back(sep);
    parent->children.push_back(std::move(child));
  }
  MaybeConsolidate(parent);
  if (parent->children.size() > config_.inner_fanout) SplitInner(parent);
}

void
PcmBTree::SplitInner(Inner *node)
{
  // sort everything, then cut into ceil(n / fanout) even chunks
  SortInner(node);

  const std::size_t n = node->seps.size();
  const std::size_t m = (n + config_.inner_fanout - 1) / config_.inner_fanout;
  if (m <= 1) return;

  std::vector<Key> all_seps = std::move(node->seps);
  std::vector<std::unique_ptr<Node>> all_children = std::move(node->children);
  node->seps.clear();
  node->children.clear();

  std::vector<std::unique_ptr<Inner>> extra;
  std::vector<Key> chunk_max;
  std::size_t pos = 0;
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t len = n / m + (c < n % m ? 1 : 0);
    Inner *target = node;
    if (c > 0) {
      extra.push_back(std::make_unique<Inner>());
      target = extra.back().get();
    }
    for (std::size_t i = 0; i < len; ++i, ++pos) {
      all_children[pos]->parent = target;
      target->seps.push_back(all_seps[pos]);
      target->children.push_back(std::move(all_children[pos]));
    }
    target->sorted_count = target->seps.size();
    chunk_max.push_back(target->seps.back());
  }

  if (node->parent == nullptr) {
    auto new_root = std::make_unique<Inner>();
    auto old_root = std::move(root_);
    old_root->parent = new_root.get();
    new_root->seps.push_back(chunk_max[0]);
    new_root->children.push_back(std::move(old_root));
    for (std::size_t c = 1; c < m; ++c) {
      extra[c - 1]->parent = new_root.get();
      new_root->seps.push_back(c + 1 == m ? kKeyInfinity : chunk_max[c]);
      new_root->children.push_back(std::move(extra[c - 1]));
    }
    new_root->sorted_count = new_root->seps.size();
    Inner *r = new_root.get();
    root_ = std::move(new_root);
    if (r->children.size() > config_.inner_fanout) SplitInner(r);
    return;
  }

  Inner *parent = node->parent;
  const std::size_t idx = ChildIndex(parent, node);
  const Key old_bound = parent->seps[idx];
  parent->seps[idx] = chunk_max[0];
  for (std::size_t c = 1; c < m; ++c) {
    extra[c - 1]->parent = parent;
    parent->seps.push_back(c + 1 == m ? std::max(old_bound, chunk_max[c]) : chunk_max[c]);
    parent->children.push_back(std::move(extra[c - 1]));
  }
  MaybeConsolidate(parent);
  if (parent->children.size() > config_.inner_fanout) SplitInner(parent);
}

void
PcmBTree::RemoveChild(Inner *parent, std::size_t idx)
{
  const Key removed_sep = parent->seps[idx];
  parent->seps.erase(parent->seps.begin() + static_cast<std::ptrdiff_t>(idx));
  parent->children.erase(parent->children.begin() + static_cast<std::ptrdiff_t>(idx));
  if (idx < parent->sorted_count) --parent->sorted_count;

  if (parent->children.empty()) {
    if (parent->parent == nullptr) {
      root_.reset();
      return;
    }
    Inner *grand = parent->parent;
    RemoveChild(grand, ChildIndex(grand, parent));
    return;
  }
  // the node's bound must stay with its largest child
  auto max_it = std::max_element(parent->seps.begin(), parent->seps.end());
  if (*max_it < removed_sep) *max_it = removed_sep;
}

void
PcmBTree::CollapseRoot()
{
  while (root_ != nullptr && !root_->is_leaf) {
    auto *inner = static_cast<Inner *>(root_.get());
    if (inner->children.size() != 1) break;
    auto child = std::move(inner->children.front());
    child->parent = nullptr;
    root_ = std::move(child);
  }
}

/*##################################################################################################
 * Leaf-level algorithms
 *################################################################################################*/

bool
PcmBTree::TryInsert(LeafView &view, const Entry &e)
{
  Leaf &leaf = view.leaf();
  const std::size_t unsorted_begin = config_.sorted_slots;
  const std::size_t unsorted_cap = config_.leaf_fanout - config_.sorted_slots;

  // gap left by a deletion in the unsorted section
  for (std::size_t s = unsorted_begin; s < unsorted_begin + leaf.unsorted_used; ++s) {
    if (!leaf.IsValid(s)) {
      view.Put(s, e);
      leaf.valid |= std::uint64_t{1} << s;
      return true;
    }
  }
  // unsorted free space
  if (leaf.unsorted_used < unsorted_cap) {
    const std::size_t s = unsorted_begin + leaf.unsorted_used;
    view.Put(s, e);
    leaf.valid |= std::uint64_t{1} << s;
    ++leaf.unsorted_used;
    return true;
  }
  // an order-preserving gap in the sorted section
  if (config_.sorted_slots == 0) return false;
  const std::size_t p = LowerBoundSorted(view, leaf.sorted_used, e.key);
  if (p > 0 && !leaf.IsValid(p - 1)) {
    view.Put(p - 1, e);
    leaf.valid |= std::uint64_t{1} << (p - 1);
    return true;
  }
  if (p < leaf.sorted_used && !leaf.IsValid(p)) {
    view.Put(p, e);
    leaf.valid |= std::uint64_t{1} << p;
    return true;
  }
  if (p == leaf.sorted_used && leaf.sorted_used < config_.sorted_slots) {
    view.Put(p, e);
    leaf.valid |= std::uint64_t{1} << p;
    ++leaf.sorted_used;
    return true;
  }
  return false;
}

void
PcmBTree::DeleteFromLeaf(LeafView &view, Key key)
{
  Leaf &leaf = view.leaf();
  std::size_t cleared = 0;
  for (std::size_t s = LowerBoundSorted(view, leaf.sorted_used, key); s < leaf.sorted_used && view.KeyAt(s) == key;
       ++s) {
    if (leaf.IsValid(s)) {
      leaf.valid &= ~(std::uint64_t{1} << s);
      ++cleared;
    }
  }
  const std::size_t unsorted_begin = config_.sorted_slots;
  for (std::size_t s = unsorted_begin; s < unsorted_begin + leaf.unsorted_used; ++s) {
    if (leaf.IsValid(s) && view.KeyAt(s) == key) {
      leaf.valid &= ~(std::uint64_t{1} << s);
      ++cleared;
    }
  }
  if (cleared == 0) ++absent_tombstones_;
}

void
PcmBTree::LeafInsert(Leaf *leaf, std::span<const Entry> ops)
{
  const std::size_t min_valid = config_.leaf_fanout / 2;
  auto view = std::make_unique<LeafView>(*this, *leaf);

  auto merge_with_sibling = [&](std::span<const Entry> rest) {
    bool right = false;
    Leaf *sib = Sibling(leaf, right);
    if (sib == nullptr) return false;
    view->Flush();
    ++merges_;
    Rebuild(right ? std::vector<Leaf *>{leaf, sib} : std::vector<Leaf *>{sib, leaf}, rest);
    return true;
  };

  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (leaf->ValidCount() < min_valid && merge_with_sibling(ops.subspan(i))) return;
    const Entry &e = ops[i];
    if (e.tombstone) {
      DeleteFromLeaf(*view, e.key);
    } else if (!TryInsert(*view, e)) {
      view->Flush();
      ++splits_;
      Rebuild({leaf}, ops.subspan(i));
      return;
    }
  }
  view->Flush();
  if (leaf->ValidCount() < min_valid) merge_with_sibling({});
}

void
PcmBTree::Rebuild(std::vector<Leaf *> group, std::span<const Entry> remaining)
{
  // gather the live entries of the group
  std::vector<Entry> merged;
  for (Leaf *leaf : group) {
    LeafView view{*this, *leaf};
    for (std::size_t s = 0; s < leaf->sorted_used; ++s)
      if (leaf->IsValid(s)) merged.push_back(view.At(s));
    for (std::size_t s = config_.sorted_slots; s < config_.sorted_slots + leaf->unsorted_used; ++s)
      if (leaf->IsValid(s)) merged.push_back(view.At(s));
  }
  // tombstones of the batch precede its inserts for the same key
  std::vector<Key> tombstones;
  for (const auto &e : remaining)
    if (e.tombstone) tombstones.push_back(e.key);
  if (!tombstones.empty()) {
    std::vector<bool> hit(tombstones.size(), false);
    std::erase_if(merged, [&](const Entry &e) {
      auto it = std::lower_bound(tombstones.begin(), tombstones.end(), e.key);
      if (it == tombstones.end() || *it != e.key) return false;
      hit[static_cast<std::size_t>(it - tombstones.begin())] = true;
      return true;
    });
    absent_tombstones_ += static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), false));
  }
  for (const auto &e : remaining)
    if (!e.tombstone) merged.push_back(Entry{e.key, e.rid, false});
  std::stable_sort(merged.begin(), merged.end(), [](const Entry &a, const Entry &b) { return a.key < b.key; });

  Inner *parent = group.front()->parent;
  Leaf *before = group.front()->prev;
  Leaf *after = group.back()->next;

  if (merged.empty()) {
    for (Leaf *leaf : group) {
      DestroyLeafRegions(leaf);
      if (leaf->parent == nullptr) {
        root_.reset();
      } else {
        RemoveChild(leaf->parent, ChildIndex(leaf->parent, leaf));
      }
    }
    if (before != nullptr) before->next = after;
    if (after != nullptr) after->prev = before;
    if (head_ == group.front()) {
      head_ = after;
      WriteSuperblock();
    }
    if (before != nullptr) WriteHeader(before);
    CollapseRoot();
    return;
  }

  // cut points: even chunks at the fill factor, never splitting a run of equal keys
  const std::size_t n = merged.size();
  const std::size_t fill = config_.FillSlots();
  const std::size_t k0 = (n + fill - 1) / fill;
  std::vector<std::size_t> cuts{0};
  for (std::size_t c = 1; c < k0; ++c) {
    std::size_t cut = n * c / k0;
    if (cut <= cuts.back()) continue;
    if (merged[cut - 1].key == merged[cut].key) {
      std::size_t fwd = cut;
      while (fwd < n && merged[fwd].key == merged[cut - 1].key) ++fwd;
      std::size_t back = cut;
      while (back > cuts.back() && merged[back - 1].key == merged[cut].key) --back;
      if (fwd - cuts.back() <= config_.leaf_fanout) {
        cut = fwd;
      } else if (back > cuts.back()) {
        cut = back;
      } else {
        throw std::length_error("more duplicates of one key than a leaf can hold");
      }
    }
    if (cut > cuts.back() && cut < n) cuts.push_back(cut);
  }
  cuts.push_back(n);
  const std::size_t k = cuts.size() - 1;
  for (std::size_t t = 0; t < k; ++t) {
    if (cuts[t + 1] - cuts[t] > config_.leaf_fanout)
      throw std::length_error("more duplicates of one key than a leaf can hold");
  }

  // the root leaf gets a parent before it can have siblings
  if (parent == nullptr && k > 1) {
    auto new_root = std::make_unique<Inner>();
    auto old = std::move(root_);
    old->parent = new_root.get();
    new_root->seps.push_back(kKeyInfinity);
    new_root->children.push_back(std::move(old));
    new_root->sorted_count = 1;
    parent = new_root.get();
    root_ = std::move(new_root);
  }

  const std::size_t m = group.size();
  std::vector<Leaf *> leaves;
  std::vector<bool> fresh;
  for (std::size_t t = 0; t < k; ++t) {
    if (t < m) {
      leaves.push_back(group[t]);
      fresh.push_back(false);
    } else {
      leaves.push_back(NewLeaf());
      fresh.push_back(true);
    }
  }

  // relink the leaf list
  for (std::size_t t = 0; t < k; ++t) {
    leaves[t]->prev = t == 0 ? before : leaves[t - 1];
    leaves[t]->next = t + 1 == k ? after : leaves[t + 1];
  }
  if (after != nullptr) after->prev = leaves.back();

  // separators: each bound sits just below the first key of the next leaf
  const Key upper = parent != nullptr ? parent->seps[ChildIndex(parent, group.back())] : kKeyInfinity;
  for (std::size_t t = k; t < m; ++t) {
    DestroyLeafRegions(group[t]);
    RemoveChild(parent, ChildIndex(parent, group[t]));  // destroys the node
  }
  for (std::size_t t = 0; t < std::min(k, m); ++t) {
    if (parent != nullptr) {
      parent->seps[ChildIndex(parent, leaves[t])] = t + 1 == k ? upper : merged[cuts[t + 1]].key - 1;
    }
  }

  // images
  for (std::size_t t = 0; t < k; ++t) {
    Leaf *leaf = leaves[t];
    LeafView view{*this, *leaf};
    const std::size_t count = cuts[t + 1] - cuts[t];
    const std::size_t in_sorted = std::min(count, config_.sorted_slots);
    const std::size_t in_unsorted = count - in_sorted;
    const std::size_t lines = slot_bytes_ / kLineBytes;
    std::vector<std::size_t> covered(lines, 0);
    for (std::size_t i = 0; i < in_sorted; ++i) ++covered[i / kSlotsPerLine];
    for (std::size_t i = 0; i < in_unsorted; ++i) ++covered[(config_.sorted_slots + i) / kSlotsPerLine];
    for (std::size_t l = 0; l < lines; ++l) {
      if (fresh[t] || covered[l] == kSlotsPerLine) view.AssumeLoaded(l);
    }
    leaf->valid = 0;
    for (std::size_t i = 0; i < in_sorted; ++i) {
      view.Put(i, merged[cuts[t] + i]);
      leaf->valid |= std::uint64_t{1} << i;
    }
    for (std::size_t i = 0; i < in_unsorted; ++i) {
      const std::size_t s = config_.sorted_slots + i;
      view.Put(s, merged[cuts[t] + in_sorted + i]);
      leaf->valid |= std::uint64_t{1} << s;
    }
    leaf->sorted_used = static_cast<std::uint16_t>(in_sorted);
    leaf->unsorted_used = static_cast<std::uint16_t>(in_unsorted);
    view.Flush();
  }

  std::vector<std::pair<Key, std::unique_ptr<Node>>> added;
  for (std::size_t t = m; t < k; ++t) {
    added.emplace_back(t + 1 == k ? upper : merged[cuts[t + 1]].key - 1, std::unique_ptr<Node>(leaves[t]));
  }
  AppendChildren(parent, std::move(added));
  CollapseRoot();
}

void
PcmBTree::BuildFresh(std::span<const Entry> batch)
{
  std::vector<Entry> entries;
  for (const auto &e : batch) {
    if (e.tombstone) {
      ++absent_tombstones_;
    } else {
      entries.push_back(Entry{e.key, e.rid, false});
    }
  }
  if (entries.empty()) return;

  auto *leaf = NewLeaf();
  root_.reset(leaf);
  head_ = leaf;
  WriteSuperblock();
  WriteHeader(leaf);
  // a single empty leaf plus the whole batch is exactly a rebuild
  Rebuild({leaf}, entries);
}

void
PcmBTree::Bulkload(std::span<const Entry> batch)
{
  if (batch.empty()) return;
  if (root_ == nullptr) {
    BuildFresh(batch);
    return;
  }
  std::size_t i = 0;
  while (i < batch.size()) {
    if (root_ == nullptr) {
      BuildFresh(batch.subspan(i));
      return;
    }
    Leaf *leaf = Route(batch[i].key);
    const Key upper = UpperBound(leaf);
    const auto slice = SliceMake(batch.subspan(i), 0, upper, true);
    if (slice.empty()) throw std::logic_error("routing disagrees with leaf bounds");
    LeafInsert(leaf, slice);
    i += slice.size();
  }
}

/*##################################################################################################
 * Public operations
 *################################################################################################*/

void
PcmBTree::Insert(const Entry &e)
{
  const Entry op{e.key, e.rid, false};
  Bulkload(std::span<const Entry>{&op, 1});
}

void
PcmBTree::Delete(Key key)
{
  if (root_ == nullptr) {
    ++absent_tombstones_;
    return;
  }
  const Entry op{key, 0, true};
  Bulkload(std::span<const Entry>{&op, 1});
}

void
PcmBTree::BulkInsert(std::span<const Entry> sorted)
{
  Bulkload(sorted);
}

std::optional<Entry>
PcmBTree::PointSearch(Key key)
{
  Leaf *leaf = Route(key);
  if (leaf == nullptr) return std::nullopt;
  LeafView view{*this, *leaf};
  for (std::size_t s = LowerBoundSorted(view, leaf->sorted_used, key); s < leaf->sorted_used && view.KeyAt(s) == key;
       ++s) {
    if (leaf->IsValid(s)) return view.At(s);
  }
  for (std::size_t s = config_.sorted_slots; s < config_.sorted_slots + leaf->unsorted_used; ++s) {
    if (leaf->IsValid(s) && view.KeyAt(s) == key) return view.At(s);
  }
  return std::nullopt;
}

void
PcmBTree::CollectLeaf(LeafView &view, Key lo, Key hi, std::vector<Entry> &out)
{
  Leaf &leaf = view.leaf();
  for (std::size_t s = LowerBoundSorted(view, leaf.sorted_used, lo); s < leaf.sorted_used && view.KeyAt(s) <= hi;
       ++s) {
    if (leaf.IsValid(s)) out.push_back(view.At(s));
  }
  for (std::size_t s = config_.sorted_slots; s < config_.sorted_slots + leaf.unsorted_used; ++s) {
    if (!leaf.IsValid(s)) continue;
    const Entry &e = view.At(s);
    if (e.key >= lo && e.key <= hi) out.push_back(e);
  }
}

std::vector<Entry>
PcmBTree::RangeSearch(Key lo, Key hi)
{
  std::vector<Entry> out;
  if (lo > hi) throw std::invalid_argument("inverted range");
  for (Leaf *leaf = Route(lo); leaf != nullptr; leaf = leaf->next) {
    LeafView view{*this, *leaf};
    CollectLeaf(view, lo, hi, out);
    if (UpperBound(leaf) >= hi) break;
  }
  std::sort(out.begin(), out.end(), EntryLess{});
  return out;
}

/*##################################################################################################
 * Crash and recovery
 *################################################################################################*/

void
PcmBTree::Crash()
{
  root_.reset();
  head_ = nullptr;
}

void
PcmBTree::Recover()
{
  root_.reset();
  head_ = nullptr;

  std::array<std::byte, 16> sb{};
  device_->Read(superblock_, 0, sb);
  std::uint64_t header_base = Load<std::uint64_t>(sb.data());
  std::uint64_t slots_base = Load<std::uint64_t>(sb.data() + 8);

  std::vector<std::unique_ptr<Node>> level;
  std::vector<Key> seps;
  Leaf *prev = nullptr;
  Key last_sep = 0;
  while (header_base != kNoAddress) {
    auto leaf = std::make_unique<Leaf>();
    leaf->header = pcm::Region{header_base, kLineBytes};
    leaf->slots = pcm::Region{slots_base, slot_bytes_};
    std::array<std::byte, 40> hdr{};
    device_->Read(leaf->header, 0, hdr);
    leaf->valid = Load<std::uint64_t>(hdr.data());
    leaf->sorted_used = Load<std::uint16_t>(hdr.data() + 8);
    leaf->unsorted_used = Load<std::uint16_t>(hdr.data() + 10);
    header_base = Load<std::uint64_t>(hdr.data() + 16);
    slots_base = Load<std::uint64_t>(hdr.data() + 24);

    LeafView view{*this, *leaf};
    for (std::size_t s = 0; s < config_.leaf_fanout; ++s) {
      if (leaf->IsValid(s)) last_sep = std::max(last_sep, view.KeyAt(s));
    }
    leaf->prev = prev;
    if (prev != nullptr) prev->next = leaf.get();
    if (head_ == nullptr) head_ = leaf.get();
    prev = leaf.get();
    seps.push_back(last_sep);
    level.push_back(std::move(leaf));
  }
  if (level.empty()) return;
  seps.back() = kKeyInfinity;

  while (level.size() > 1) {
    std::vector<std::unique_ptr<Node>> up;
    std::vector<Key> up_seps;
    for (std::size_t i = 0; i < level.size(); i += config_.inner_fanout) {
      auto inner = std::make_unique<Inner>();
      const std::size_t end = std::min(level.size(), i + config_.inner_fanout);
      for (std::size_t j = i; j < end; ++j) {
        level[j]->parent = inner.get();
        inner->seps.push_back(seps[j]);
        inner->children.push_back(std::move(level[j]));
      }
      inner->sorted_count = inner->seps.size();
      up_seps.push_back(inner->seps.back());
      up.push_back(std::move(inner));
    }
    level = std::move(up);
    seps = std::move(up_seps);
  }
  root_ = std::move(level.front());
}

/*##################################################################################################
 * Introspection
 *################################################################################################*/

IndexStats
PcmBTree::Stats() const
{
  IndexStats s{};
  for (const Leaf *l = head_; l != nullptr; l = l->next) {
    ++s.leaves;
    s.entries += l->ValidCount();
  }
  std::vector<const Node *> stack;
  if (root_ != nullptr) stack.push_back(root_.get());
  while (!stack.empty()) {
    const Node *n = stack.back();
    stack.pop_back();
    if (n->is_leaf) continue;
    ++s.inner_nodes;
    for (const auto &c : static_cast<const Inner *>(n)->children) stack.push_back(c.get());
  }
  s.splits = splits_;
  s.merges = merges_;
  s.absent_tombstones = absent_tombstones_;
  return s;
}

std::vector<PcmBTree::LeafSnapshot>
PcmBTree::SnapshotLeaves() const
{
  std::vector<LeafSnapshot> out;
  std::vector<std::byte> buf(slot_bytes_);
  for (const Leaf *l = head_; l != nullptr; l = l->next) {
    device_->Peek(l->slots, 0, buf);
    auto key_at = [&](std::size_t s) { return Load<Key>(buf.data() + s * kEntryBytes); };
    LeafSnapshot snap{};
    snap.sorted_used = l->sorted_used;
    snap.unsorted_used = l->unsorted_used;
    snap.header = l->header;
    snap.slots = l->slots;
    for (std::size_t s = 0; s < l->sorted_used; ++s) (l->IsValid(s) ? snap.sorted : snap.invalid).push_back(key_at(s));
    for (std::size_t s = config_.sorted_slots; s < config_.sorted_slots + l->unsorted_used; ++s)
      (l->IsValid(s) ? snap.unsorted : snap.invalid).push_back(key_at(s));
    out.push_back(std::move(snap));
  }
  return out;
}

std::string
PcmBTree::DumpLeaves() const
{
  auto join = [](const std::vector<Key> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) s += ',';
      s += std::to_string(v[i]);
    }
    return s;
  };
  std::ostringstream os;
  std::size_t id = 0;
  for (const auto &snap : SnapshotLeaves()) {
    os << "leaf " << id++ << " sorted=[" << join(snap.sorted) << "] unsorted=[" << join(snap.unsorted)
       << "] invalid=[" << join(snap.invalid) << "]\n";
  }
  return os.str();
}

PcmBTree::RootSeparators
PcmBTree::RootKeys() const
{
  RootSeparators r{};
  if (root_ == nullptr || root_->is_leaf) return r;
  const auto *inner = static_cast<const Inner *>(root_.get());
  r.sorted.assign(inner->seps.begin(), inner->seps.begin() + static_cast<std::ptrdiff_t>(inner->sorted_count));
  r.unsorted.assign(inner->seps.begin() + static_cast<std::ptrdiff_t>(inner->sorted_count), inner->seps.end());
  return r;
}

std::size_t
PcmBTree::Height() const
{
  std::size_t h = 0;
  for (const Node *n = root_.get(); n != nullptr; ++h) {
    n = n->is_leaf ? nullptr : static_cast<const Inner *>(n)->children.front().get();
  }
  return h;
}

}  // namespace pam
