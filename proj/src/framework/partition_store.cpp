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
#include "pam/framework/partition_store.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace pam
{
namespace
{
constexpr std::size_t kLineBytes = 64;
constexpr std::size_t kPerLine = kLineBytes / kEntryBytes;
constexpr std::size_t kDirRecordBytes = 32;

}  // namespace

/// Per-operation view of a partition that reads each line at most once.
class PartitionStore::Cursor
{
 public:
  Cursor(pcm::SimDevice &device, const Partition &p) : device_{&device}, part_{&p} {}

  const Entry &At(std::size_t pos)
  {
    const std::size_t line = pos / kPerLine;
    auto it = lines_.find(line);
    if (it == lines_.end()) {
      std::array<std::byte, kLineBytes> buf{};
      const std::size_t first = line * kPerLine;
      const std::size_t n = std::min(kPerLine, part_->count - first);
      device_->Read(part_->region, first * kEntryBytes, std::span{buf.data(), n * kEntryBytes});
      std::array<Entry, kPerLine> entries{};
      for (std::size_t i = 0; i < n; ++i) {
        entries[i] = DecodeEntry(std::span<const std::byte, kEntryBytes>{buf.data() + i * kEntryBytes, kEntryBytes});
      }
      it = lines_.emplace(line, entries).first;
    }
    return it->second[pos % kPerLine];
  }

  /// First position in [lo, hi) whose key is >= key.
  std::size_t LowerBound(std::size_t lo, std::size_t hi, Key key)
  {
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (At(mid).key < key) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

 private:
  pcm::SimDevice *device_;
  const Partition *part_;
  std::unordered_map<std::size_t, std::array<Entry, kPerLine>> lines_;
};

PartitionStore::PartitionStore(pcm::SimDevice &device, std::size_t capacity) : device_{&device}, capacity_{capacity}
{
  if (capacity_ == 0) throw std::invalid_argument("partition capacity must be positive");
  root_ = device_->Alloc(kLineBytes);
}

PartitionStore::~PartitionStore()
{
  for (auto &[id, p] : parts_) {
    if (device_->IsLive(p.region)) device_->Free(p.region);
  }
  if (!directory_.Empty() && device_->IsLive(directory_)) device_->Free(directory_);
  if (device_->IsLive(root_)) device_->Free(root_);
}

void
PartitionStore::Initialize(std::span<const Entry> dataset)
{
  if (!parts_.empty() || !directory_.Empty()) throw std::logic_error("partitions already initialized");
  if (dataset.empty()) return;

  const std::size_t n_parts = (dataset.size() + capacity_ - 1) / capacity_;
  directory_ = device_->Alloc(n_parts * kDirRecordBytes);
  {
    std::array<std::byte, 24> buf{};
    const std::uint64_t base = directory_.base;
    const std::uint64_t length = directory_.length;
    const std::uint64_t count = n_parts;
    std::memcpy(buf.data(), &base, 8);
    std::memcpy(buf.data() + 8, &length, 8);
    std::memcpy(buf.data() + 16, &count, 8);
    device_->Write(root_, 0, buf);
  }

  std::vector<Entry> sorting_buffer;
  sorting_buffer.reserve(std::min(capacity_, dataset.size()));
  std::vector<std::byte> image;
  for (std::size_t start = 0, id = 0; start < dataset.size(); start += capacity_, ++id) {
    const std::size_t n = std::min(capacity_, dataset.size() - start);
    sorting_buffer.assign(dataset.begin() + static_cast<std::ptrdiff_t>(start),
                          dataset.begin() + static_cast<std::ptrdiff_t>(start + n));
    std::sort(sorting_buffer.begin(), sorting_buffer.end(), EntryLess{});

    Partition p{};
    p.id = static_cast<std::uint32_t>(id);
    p.region = device_->Alloc(n * kEntryBytes);
    p.count = n;
    image.assign(n * kEntryBytes, std::byte{0});
    for (std::size_t i = 0; i < n; ++i) {
      EncodeEntry(Entry{sorting_buffer[i].key, sorting_buffer[i].rid, false},
                  std::span<std::byte, kEntryBytes>{image.data() + i * kEntryBytes, kEntryBytes});
    }
    device_->Write(p.region, 0, image);
    p.min_pos = 0;
    p.max_pos = n - 1;
    p.min = sorting_buffer.front().key;
    p.max = sorting_buffer.back().key;
    p.live = n;
    WriteDirectoryRecord(p.id, p, false);
    parts_.emplace(p.id, p);
  }
}

void
PartitionStore::WriteDirectoryRecord(std::uint32_t id, const Partition &p, bool freed)
{
  std::array<std::byte, kDirRecordBytes> buf{};
  const std::uint64_t base = p.region.base;
  const std::uint64_t length = p.region.length;
  const std::uint64_t count = p.count;
  const std::uint64_t flags = freed ? 1 : 0;
  std::memcpy(buf.data(), &base, 8);
  std::memcpy(buf.data() + 8, &length, 8);
  std::memcpy(buf.data() + 16, &count, 8);
  std::memcpy(buf.data() + 24, &flags, 8);
  device_->Write(directory_, std::size_t{id} * kDirRecordBytes, buf);
}

Partition *
PartitionStore::Find(std::uint32_t id)
{
  auto it = parts_.find(id);
  return it == parts_.end() ? nullptr : &it->second;
}

std::vector<std::uint32_t>
PartitionStore::Overlapping(Key lo, Key hi) const
{
  std::vector<std::uint32_t> ids;
  for (const auto &[id, p] : parts_) {
    if (p.min <= hi && p.max >= lo) ids.push_back(id);
  }
  return ids;
}

std::vector<PartitionHit>
PartitionStore::Scan(const Partition &p, Key lo, Key hi)
{
  std::vector<PartitionHit> hits;
  if (p.live == 0 || lo > p.max || hi < p.min) return hits;
  Cursor cur{*device_, p};
  for (std::size_t pos = cur.LowerBound(p.min_pos, p.max_pos + 1, lo); pos <= p.max_pos; ++pos) {
    const Entry &e = cur.At(pos);
    if (e.key > hi) break;
    hits.push_back(PartitionHit{pos, e});
  }
  return hits;
}

std::vector<Entry>
PartitionStore::ReadAll(const Partition &p)
{
  std::vector<Entry> out(p.count);
  std::vector<std::byte> buf(p.count * kEntryBytes);
  device_->Read(p.region, 0, buf);
  for (std::size_t i = 0; i < p.count; ++i) {
    out[i] = DecodeEntry(std::span<const std::byte, kEntryBytes>{buf.data() + i * kEntryBytes, kEntryBytes});
  }
  return out;
}

bool
PartitionStore::AdvanceBounds(Partition &p, const DeadRange &dead)
{
  Cursor cur{*device_, p};
  std::size_t lo = p.min_pos;
  std::size_t hi = p.max_pos + 1;  // exclusive
  while (lo < hi) {
    const auto r = dead(cur.At(lo).key);
    if (!r) break;
    lo = r->hi == kKeyInfinity ? hi : cur.LowerBound(lo + 1, hi, r->hi + 1);
  }
  while (lo < hi) {
    const auto r = dead(cur.At(hi - 1).key);
    if (!r) break;
    hi = cur.LowerBound(lo, hi - 1, r->lo);
  }
  if (lo >= hi) return false;
  p.min_pos = lo;
  p.max_pos = hi - 1;
  p.min = cur.At(lo).key;
  p.max = cur.At(hi - 1).key;
  return true;
}

void
PartitionStore::Free(std::uint32_t id)
{
  auto it = parts_.find(id);
  if (it == parts_.end()) return;
  WriteDirectoryRecord(id, it->second, true);
  device_->Free(it->second.region);
  parts_.erase(it);
}

void
PartitionStore::Recover()
{
  parts_.clear();
  std::array<std::byte, 24> root{};
  device_->Read(root_, 0, root);
  std::uint64_t base = 0;
  std::uint64_t length = 0;
  std::uint64_t count = 0;
  std::memcpy(&base, root.data(), 8);
  std::memcpy(&length, root.data() + 8, 8);
  std::memcpy(&count, root.data() + 16, 8);
  if (count == 0) return;
  directory_ = pcm::Region{base, length};

  std::vector<std::byte> dir(count * kDirRecordBytes);
  device_->Read(directory_, 0, dir);
  for (std::uint32_t id = 0; id < count; ++id) {
    const std::byte *rec = dir.data() + std::size_t{id} * kDirRecordBytes;
    std::uint64_t fields[4];
    std::memcpy(fields, rec, sizeof(fields));
    if (fields[3] & 1U) continue;
    Partition p{};
    p.id = id;
    p.region = pcm::Region{fields[0], fields[1]};
    p.count = fields[2];
    p.min_pos = 0;
    p.max_pos = p.count - 1;
    p.live = p.count;
    parts_.emplace(id, p);
  }
}

}  // namespace pam
