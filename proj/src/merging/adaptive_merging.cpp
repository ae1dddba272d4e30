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
#include "pam/merging/adaptive_merging.hpp"

#include <algorithm>
#include <stdexcept>

#include "pam/index/partitioned_btree.hpp"

namespace pam
{
namespace
{
constexpr std::uint32_t kNoPartition = 0xFFFF;

}  // namespace

Invalidation
ParseInvalidation(std::string_view name)
{
  if (name == "flag") return Invalidation::kFlag;
  if (name == "bitmap") return Invalidation::kBitmap;
  if (name == "journal") return Invalidation::kJournal;
  throw std::invalid_argument("unknown invalidation strategy: " + std::string{name});
}

std::string_view
InvalidationName(Invalidation inv)
{
  switch (inv) {
    case Invalidation::kFlag:
      return "flag";
    case Invalidation::kBitmap:
      return "bitmap";
    case Invalidation::kJournal:
      return "journal";
  }
  return "?";
}

bool
AmConfig::Set(const std::string &key, const std::string &value)
{
  auto parse_size = [&](std::size_t &out) {
    std::size_t pos = 0;
    out = std::stoull(value, &pos);
    if (pos != value.size() || out == 0) throw std::invalid_argument("invalid value for " + key + ": " + value);
  };
  if (key == "index") {
    index = ParseIndexKind(value);
  } else if (key == "invalidation") {
    invalidation = ParseInvalidation(value);
  } else if (key == "pool_capacity") {
    parse_size(pool_capacity);
  } else if (key == "partition_capacity") {
    parse_size(partition_capacity);
  } else {
    return tree.Set(key, value);
  }
  return true;
}

AmConfig
MakeAmConfig()
{
  return AmConfig{};
}

AmConfig
MakeEamConfig()
{
  AmConfig c{};
  c.index = IndexKind::kUB;
  c.invalidation = Invalidation::kBitmap;
  return c;
}

std::vector<Key>
MemoryPool::TakeAll()
{
  std::vector<Key> out(keys_.begin(), keys_.end());
  keys_.clear();
  return out;
}

AdaptiveMerging::AdaptiveMerging(pcm::SimDevice &device, AmConfig config, std::string name)
    : device_{&device},
      config_{config},
      name_{std::move(name)},
      index_{MakeMergeIndex(config.index, device, config.tree)},
      store_{device, config.partition_capacity},
      pool_{config.pool_capacity}
{
}

void
AdaptiveMerging::Initialize(std::span<const Entry> dataset)
{
  store_.Initialize(dataset);
  for (const auto &[id, p] : store_.Partitions()) {
    Marks m{};
    m.invalid.assign(p.count, false);
    if (config_.invalidation == Invalidation::kFlag) {
      m.region = device_->Alloc(p.count);
    } else if (config_.invalidation == Invalidation::kBitmap) {
      m.region = device_->Alloc((p.count + 7) / 8);
    }
    marks_.emplace(id, std::move(m));
  }
}

Entry
AdaptiveMerging::ToIndex(std::uint32_t pid, const Entry &e) const
{
  if (config_.index != IndexKind::kPartitioned) return Entry{e.key, e.rid, false};
  return Entry{e.key, PackPartitionRid(pid, e.rid), false};
}

Entry
AdaptiveMerging::FromIndex(const Entry &e) const
{
  if (config_.index != IndexKind::kPartitioned) return e;
  return Entry{e.key, RowOf(e.rid), false};
}

std::vector<PartitionHit>
AdaptiveMerging::ValidHits(const Partition &p, Key lo, Key hi)
{
  auto hits = store_.Scan(p, lo, hi);
  if (hits.empty()) return hits;
  Marks &m = marks_.at(p.id);
  const std::size_t first = hits.front().pos;
  const std::size_t last = hits.back().pos;
  // the marks covering the hit positions are read from PCM
  if (config_.invalidation == Invalidation::kFlag) {
    std::vector<std::byte> buf(last - first + 1);
    device_->Read(m.region, first, buf);
  } else if (config_.invalidation == Invalidation::kBitmap) {
    std::vector<std::byte> buf(last / 8 - first / 8 + 1);
    device_->Read(m.region, first / 8, buf);
  }
  std::erase_if(hits, [&](const PartitionHit &h) { return m.invalid[h.pos]; });
  return hits;
}

pcm::WriteReceipt
AdaptiveMerging::Invalidate(std::uint32_t id, std::span<const std::size_t> positions)
{
  pcm::WriteReceipt receipt{};
  if (positions.empty()) return receipt;
  Marks &m = marks_.at(id);
  std::vector<std::size_t> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t pos : sorted) m.invalid.at(pos) = true;

  // contiguous runs of positions
  std::vector<KeyRange> runs;
  for (std::size_t pos : sorted) {
    if (!runs.empty() && runs.back().hi + 1 >= pos) {
      runs.back().hi = std::max<Key>(runs.back().hi, pos);
    } else {
      runs.push_back(KeyRange{pos, pos});
    }
  }

  switch (config_.invalidation) {
    case Invalidation::kFlag:
      for (const auto &r : runs) {
        std::vector<std::byte> flags(r.hi - r.lo + 1, std::byte{1});
        receipt += device_->Write(m.region, r.lo, flags);
      }
      break;
    case Invalidation::kBitmap:
      for (const auto &r : runs) {
        // read-modify-write of the bytes holding the run's bits
        const std::size_t b0 = r.lo / 8;
        const std::size_t b1 = r.hi / 8;
        std::vector<std::byte> bytes(b1 - b0 + 1);
        const auto before = device_->SimTime();
        device_->Read(m.region, b0, bytes);
        receipt.cost_ns += device_->SimTime() - before;
        for (std::size_t pos = r.lo; pos <= r.hi; ++pos) bytes[pos / 8 - b0] |= std::byte{1} << (pos % 8);
        receipt += device_->Write(m.region, b0, bytes);
      }
      break;
    case Invalidation::kJournal:
      for (const auto &r : runs) m.journal.Add(r.lo, r.hi);
      break;
  }
  invalidation_ns_ += receipt.cost_ns;
  return receipt;
}

void
AdaptiveMerging::ReleaseIfEmpty(std::uint32_t id)
{
  Partition *p = store_.Find(id);
  if (p == nullptr || p->live > 0) return;
  auto it = marks_.find(id);
  if (it != marks_.end()) {
    if (!it->second.region.Empty()) device_->Free(it->second.region);
    marks_.erase(it);
  }
  store_.Free(id);
}

std::vector<Entry>
AdaptiveMerging::Search(Key lo, Key hi)
{
  if (lo > hi) throw std::invalid_argument("inverted range");
  auto found = index_->RangeSearch(lo, hi);
  std::vector<Entry> result;
  result.reserve(found.size());
  for (const auto &e : found) result.push_back(FromIndex(e));

  for (std::uint32_t id : store_.Overlapping(lo, hi)) {
    Partition &p = *store_.Find(id);
    const auto hits = ValidHits(p, lo, hi);
    if (hits.empty()) continue;
    std::vector<std::size_t> positions;
    positions.reserve(hits.size());
    for (const auto &h : hits) {
      index_->Insert(ToIndex(id, h.entry));
      result.push_back(Entry{h.entry.key, h.entry.rid, false});
      positions.push_back(h.pos);
    }
    Invalidate(id, positions);
    p.live -= hits.size();
    ReleaseIfEmpty(id);
  }

  if (pool_.Size() > 0) std::erase_if(result, [&](const Entry &e) { return pool_.Contains(e.key); });
  std::sort(result.begin(), result.end(), EntryLess{});
  return result;
}

void
AdaptiveMerging::ApplyDelete(Key key)
{
  index_->Delete(key);
  for (std::uint32_t id : store_.Overlapping(key, key)) {
    Partition &p = *store_.Find(id);
    const auto hits = ValidHits(p, key, key);
    if (hits.empty()) continue;
    std::vector<std::size_t> positions;
    for (const auto &h : hits) positions.push_back(h.pos);
    Invalidate(id, positions);
    p.live -= hits.size();
    ReleaseIfEmpty(id);
  }
}

void
AdaptiveMerging::DrainPool()
{
  for (Key key : pool_.TakeAll()) ApplyDelete(key);
}

void
AdaptiveMerging::Insert(const Entry &e)
{
  if (pool_.Remove(e.key)) ApplyDelete(e.key);
  index_->Insert(ToIndex(kNoPartition, e));
}

void
AdaptiveMerging::Delete(Key key)
{
  pool_.Add(key);
  if (pool_.Full()) DrainPool();
}

std::vector<Entry>
AdaptiveMerging::Lookup(Key key)
{
  std::vector<Entry> out;
  if (pool_.Contains(key)) return out;
  for (const auto &e : index_->RangeSearch(key, key)) out.push_back(FromIndex(e));
  for (std::uint32_t id : store_.Overlapping(key, key)) {
    for (const auto &h : ValidHits(*store_.Find(id), key, key)) out.push_back(h.entry);
  }
  std::sort(out.begin(), out.end(), EntryLess{});
  return out;
}

void
AdaptiveMerging::Sync()
{
  DrainPool();
  index_->Sync();
}

}  // namespace pam
