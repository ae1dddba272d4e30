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
#include "pam/index/partitioned_btree.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <stdexcept>

namespace pam
{
namespace
{
constexpr std::size_t kLineBytes = 64;
constexpr std::uint64_t kNoAddress = ~std::uint64_t{0};

}  // namespace

PartitionedBTree::PartitionedBTree(pcm::SimDevice &device, std::size_t leaf_fanout)
    : device_{&device}, fanout_{leaf_fanout}
{
  if (fanout_ < 4 || fanout_ > 4096) throw std::invalid_argument("leaf_fanout must be within [4, 4096]");
  slot_bytes_ = (fanout_ * kEntryBytes + kLineBytes - 1) / kLineBytes * kLineBytes;
  superblock_ = device_->Alloc(kLineBytes);
  leaves_.emplace(kKeyInfinity, std::unique_ptr<Leaf>{NewLeaf()});
  WriteSuperblock();
}

PartitionedBTree::~PartitionedBTree()
{
  for (auto &[sep, leaf] : leaves_) FreeLeaf(leaf.get());
  if (device_->IsLive(superblock_)) device_->Free(superblock_);
}

PartitionedBTree::Leaf *
PartitionedBTree::NewLeaf()
{
  auto *leaf = new Leaf{};
  leaf->header = device_->Alloc(kLineBytes);
  leaf->slots = device_->Alloc(slot_bytes_);
  return leaf;
}

void
PartitionedBTree::FreeLeaf(Leaf *leaf)
{
  if (device_->IsLive(leaf->header)) device_->Free(leaf->header);
  if (device_->IsLive(leaf->slots)) device_->Free(leaf->slots);
}

void
PartitionedBTree::WriteHeader(const Leaf &leaf)
{
  std::array<std::byte, 24> buf{};
  const std::uint64_t count = leaf.count;
  const std::uint64_t next_h = leaf.next != nullptr ? leaf.next->header.base : kNoAddress;
  const std::uint64_t next_s = leaf.next != nullptr ? leaf.next->slots.base : kNoAddress;
  std::memcpy(buf.data(), &count, 8);
  std::memcpy(buf.data() + 8, &next_h, 8);
  std::memcpy(buf.data() + 16, &next_s, 8);
  device_->Write(leaf.header, 0, buf);
}

void
PartitionedBTree::WriteSuperblock()
{
  const Leaf &head = *leaves_.begin()->second;
  std::array<std::byte, 16> buf{};
  std::memcpy(buf.data(), &head.header.base, 8);
  std::memcpy(buf.data() + 8, &head.slots.base, 8);
  device_->Write(superblock_, 0, buf);
}

std::map<Key, std::unique_ptr<PartitionedBTree::Leaf>>::iterator
PartitionedBTree::RouteIt(Key key)
{
  return leaves_.lower_bound(key);  // the last separator is infinity, so never end()
}

std::vector<Entry>
PartitionedBTree::ReadEntries(const Leaf &leaf, std::size_t from, std::size_t to)
{
  std::vector<Entry> out;
  if (from >= to) return out;
  std::vector<std::byte> buf((to - from) * kEntryBytes);
  device_->Read(leaf.slots, from * kEntryBytes, buf);
  out.reserve(to - from);
  for (std::size_t i = 0; i < to - from; ++i) {
    out.push_back(DecodeEntry(std::span<const std::byte, kEntryBytes>{buf.data() + i * kEntryBytes, kEntryBytes}));
  }
  return out;
}

void
PartitionedBTree::WriteEntries(const Leaf &leaf, std::size_t from, std::span<const Entry> entries)
{
  if (entries.empty()) return;
  std::vector<std::byte> buf(entries.size() * kEntryBytes);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    EncodeEntry(Entry{entries[i].key, entries[i].rid, false},
                std::span<std::byte, kEntryBytes>{buf.data() + i * kEntryBytes, kEntryBytes});
  }
  device_->Write(leaf.slots, from * kEntryBytes, buf);
}

std::size_t
PartitionedBTree::LowerBound(const Leaf &leaf, Key key)
{
  // line-at-a-time binary search over the sorted keys
  constexpr std::size_t per_line = kLineBytes / kEntryBytes;
  std::size_t lo = 0;
  std::size_t hi = leaf.count;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const std::size_t a = std::max(lo, mid / per_line * per_line);
    const std::size_t b = std::min(hi, mid / per_line * per_line + per_line);
    const auto line = ReadEntries(leaf, a, b);
    if (line.back().key < key) {
      lo = b;
    } else if (line.front().key >= key) {
      hi = a;
    } else {
      std::size_t s = 1;
      while (line[s].key < key) ++s;
      return a + s;
    }
  }
  return lo;
}

void
PartitionedBTree::Insert(const Entry &e)
{
  auto it = RouteIt(e.key);
  if (it->second->count == fanout_) {
    Split(it);
    it = RouteIt(e.key);
  }
  Leaf &leaf = *it->second;
  // insert after existing duplicates
  const std::size_t p = LowerBound(leaf, e.key == kKeyInfinity ? e.key : e.key + 1);
  auto tail = ReadEntries(leaf, p, leaf.count);
  tail.insert(tail.begin(), Entry{e.key, e.rid, false});
  WriteEntries(leaf, p, tail);
  ++leaf.count;
  WriteHeader(leaf);
}

void
PartitionedBTree::Split(std::map<Key, std::unique_ptr<Leaf>>::iterator it)
{
  Leaf &left = *it->second;
  auto all = ReadEntries(left, 0, left.count);
  std::size_t cut = all.size() / 2;
  // keep runs of equal keys together
  std::size_t fwd = cut;
  while (fwd < all.size() && all[fwd].key == all[cut - 1].key) ++fwd;
  std::size_t back = cut;
  while (back > 0 && all[back - 1].key == all[cut].key) --back;
  if (fwd < all.size()) {
    cut = fwd;
  } else if (back > 0) {
    cut = back;
  } else {
    throw std::length_error("more duplicates of one key than a leaf can hold");
  }

  auto *right = NewLeaf();
  const Key upper = it->first;
  const Key left_max = all[cut - 1].key;
  WriteEntries(*right, 0, std::span<const Entry>{all}.subspan(cut));
  right->count = all.size() - cut;
  right->next = left.next;
  WriteHeader(*right);

  auto node = std::move(it->second);
  leaves_.erase(it);
  node->count = cut;
  node->next = right;
  WriteHeader(*node);
  leaves_.emplace(left_max, std::move(node));
  leaves_.emplace(upper, std::unique_ptr<Leaf>{right});
  ++splits_;
}

void
PartitionedBTree::RemoveRange(std::map<Key, std::unique_ptr<Leaf>>::iterator it, std::size_t from, std::size_t to)
{
  Leaf &leaf = *it->second;
  auto tail = ReadEntries(leaf, to, leaf.count);
  WriteEntries(leaf, from, tail);
  leaf.count -= to - from;

  if (leaf.count > 0 || leaves_.size() == 1) {
    WriteHeader(leaf);
    return;
  }
  // drop the empty leaf; its predecessor inherits the link and, if needed, the bound
  const Key sep = it->first;
  Leaf *prev = it == leaves_.begin() ? nullptr : std::prev(it)->second.get();
  auto node = std::move(it->second);
  const bool was_head = it == leaves_.begin();
  auto next_it = leaves_.erase(it);
  if (prev != nullptr) {
    prev->next = node->next;
    WriteHeader(*prev);
    if (next_it == leaves_.end()) {
      auto prev_it = std::prev(next_it);
      auto moved = std::move(prev_it->second);
      leaves_.erase(prev_it);
      leaves_.emplace(sep, std::move(moved));
    }
  }
  FreeLeaf(node.get());
  if (was_head) WriteSuperblock();
}

void
PartitionedBTree::Delete(Key key)
{
  auto it = RouteIt(key);
  Leaf &leaf = *it->second;
  const std::size_t p = LowerBound(leaf, key);
  std::size_t q = p;
  if (p < leaf.count) {
    auto run = ReadEntries(leaf, p, leaf.count);
    while (q - p < run.size() && run[q - p].key == key) ++q;
  }
  if (q == p) {
    ++absent_;
    return;
  }
  RemoveRange(it, p, q);
}

bool
PartitionedBTree::Erase(Key key, Rid rid)
{
  auto it = RouteIt(key);
  Leaf &leaf = *it->second;
  const std::size_t p = LowerBound(leaf, key);
  if (p >= leaf.count) return false;
  auto run = ReadEntries(leaf, p, leaf.count);
  for (std::size_t i = 0; i < run.size() && run[i].key == key; ++i) {
    if (run[i].rid == rid) {
      RemoveRange(it, p + i, p + i + 1);
      return true;
    }
  }
  return false;
}

void
PartitionedBTree::BulkInsert(std::span<const Entry> sorted)
{
  for (const auto &e : sorted) {
    if (e.tombstone) {
      Delete(e.key);
    } else {
      Insert(e);
    }
  }
}

std::optional<Entry>
PartitionedBTree::PointSearch(Key key)
{
  Leaf &leaf = *RouteIt(key)->second;
  const std::size_t p = LowerBound(leaf, key);
  if (p >= leaf.count) return std::nullopt;
  auto e = ReadEntries(leaf, p, p + 1).front();
  if (e.key != key) return std::nullopt;
  return e;
}

std::vector<Entry>
PartitionedBTree::RangeSearch(Key lo, Key hi)
{
  if (lo > hi) throw std::invalid_argument("inverted range");
  std::vector<Entry> out;
  for (auto it = RouteIt(lo); it != leaves_.end(); ++it) {
    const Leaf &leaf = *it->second;
    const std::size_t p = LowerBound(leaf, lo);
    // scan line by line until a key passes hi
    constexpr std::size_t per_line = kLineBytes / kEntryBytes;
    bool done = false;
    for (std::size_t s = p; s < leaf.count && !done; s = (s / per_line + 1) * per_line) {
      const std::size_t e = std::min(leaf.count, (s / per_line + 1) * per_line);
      for (const auto &entry : ReadEntries(leaf, s, e)) {
        if (entry.key > hi) {
          done = true;
          break;
        }
        out.push_back(entry);
      }
    }
    if (done || it->first >= hi) break;
  }
  std::sort(out.begin(), out.end(), EntryLess{});
  return out;
}

void
PartitionedBTree::Crash()
{
  leaves_.clear();  // DRAM nodes are lost; their PCM regions stay allocated
}

void
PartitionedBTree::Recover()
{
  leaves_.clear();
  std::array<std::byte, 16> sb{};
  device_->Read(superblock_, 0, sb);
  std::uint64_t header_base = 0;
  std::uint64_t slots_base = 0;
  std::memcpy(&header_base, sb.data(), 8);
  std::memcpy(&slots_base, sb.data() + 8, 8);

  std::vector<std::unique_ptr<Leaf>> chain;
  Key last = 0;
  std::vector<Key> seps;
  while (header_base != kNoAddress) {
    auto leaf = std::make_unique<Leaf>();
    leaf->header = pcm::Region{header_base, kLineBytes};
    leaf->slots = pcm::Region{slots_base, slot_bytes_};
    std::array<std::byte, 24> hdr{};
    device_->Read(leaf->header, 0, hdr);
    std::uint64_t count = 0;
    std::memcpy(&count, hdr.data(), 8);
    std::memcpy(&header_base, hdr.data() + 8, 8);
    std::memcpy(&slots_base, hdr.data() + 16, 8);
    leaf->count = count;
    if (count > 0) last = ReadEntries(*leaf, count - 1, count).front().key;
    if (!chain.empty()) chain.back()->next = leaf.get();
    seps.push_back(last);
    chain.push_back(std::move(leaf));
  }
  seps.back() = kKeyInfinity;
  for (std::size_t i = 0; i < chain.size(); ++i) leaves_.emplace(seps[i], std::move(chain[i]));
}

IndexStats
PartitionedBTree::Stats() const
{
  IndexStats s{};
  s.leaves = leaves_.size();
  for (const auto &[sep, leaf] : leaves_) s.entries += leaf->count;
  s.inner_nodes = leaves_.size() > 1 ? (leaves_.size() + fanout_ - 2) / (fanout_ - 1) : 0;
  s.splits = splits_;
  s.absent_tombstones = absent_;
  return s;
}

}  // namespace pam
