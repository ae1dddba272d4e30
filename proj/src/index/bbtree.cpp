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
#include "pam/index/bbtree.hpp"

#include "pam/index/partitioned_btree.hpp"

#include <algorithm>
#include <stdexcept>

namespace pam
{
IndexKind
ParseIndexKind(std::string_view name)
{
  if (name == "bb") return IndexKind::kBB;
  if (name == "sb") return IndexKind::kSB;
  if (name == "ub") return IndexKind::kUB;
  if (name == "pbt" || name == "partitioned") return IndexKind::kPartitioned;
  throw std::invalid_argument("unknown index kind: " + std::string{name});
}

std::string_view
IndexKindName(IndexKind kind)
{
  switch (kind) {
    case IndexKind::kBB:
      return "bb";
    case IndexKind::kSB:
      return "sb";
    case IndexKind::kUB:
      return "ub";
    case IndexKind::kPartitioned:
      return "pbt";
  }
  return "?";
}

std::unique_ptr<MergeIndex>
MakeMergeIndex(IndexKind kind, pcm::SimDevice &device, const BBTreeConfig &config)
{
  switch (kind) {
    case IndexKind::kBB:
      return std::make_unique<BBTree>(device, config);
    case IndexKind::kSB:
      return MakeSBTree(device, config.tree);
    case IndexKind::kUB:
      return MakeUBTree(device, config.tree);
    case IndexKind::kPartitioned:
      return std::make_unique<PartitionedBTree>(device, config.tree.leaf_fanout);
  }
  throw std::invalid_argument("unknown index kind");
}

void
BBTreeConfig::Validate() const
{
  tree.Validate();
  if (buffer_threshold == 0) throw std::invalid_argument("buffer_threshold must be positive");
}

bool
BBTreeConfig::Set(const std::string &key, const std::string &value)
{
  if (key == "buffer_threshold") {
    std::size_t pos = 0;
    buffer_threshold = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("invalid value for buffer_threshold: " + value);
    return true;
  }
  return tree.Set(key, value);
}

BBTree::BBTree(pcm::SimDevice &device, BBTreeConfig config)
    : device_{&device}, config_{config}, tree_{device, config.tree, "bb"}
{
  config_.Validate();
}

void
BBTree::EnableEntryLog()
{
  if (log_ == nullptr) log_ = std::make_unique<PcmLog>(*device_);
}

void
BBTree::BufferInsert(const Entry &e)
{
  buffer_[e.key].inserts.push_back(e.rid);
  ++buffered_;
}

void
BBTree::BufferDelete(Key key)
{
  auto &p = buffer_[key];
  buffered_ -= p.inserts.size();
  p.inserts.clear();
  if (!p.tombstone) {
    p.tombstone = true;
    ++buffered_;
  }
}

void
BBTree::Insert(const Entry &e)
{
  if (log_ != nullptr) log_->Append(Entry{e.key, e.rid, false});
  BufferInsert(e);
  MaybeFlush();
}

void
BBTree::Delete(Key key)
{
  if (log_ != nullptr) log_->Append(Entry{key, 0, true});
  BufferDelete(key);
  MaybeFlush();
}

void
BBTree::MaybeFlush()
{
  if (buffered_ >= config_.buffer_threshold) FlushBuffer();
}

void
BBTree::FlushBuffer()
{
  if (buffer_.empty()) return;
  std::vector<Entry> batch;
  batch.reserve(buffered_);
  for (const auto &[key, p] : buffer_) {
    if (p.tombstone) batch.push_back(Entry{key, 0, true});
    for (Rid rid : p.inserts) batch.push_back(Entry{key, rid, false});
  }
  buffer_.clear();
  buffered_ = 0;
  tree_.Bulkload(batch);
  if (log_ != nullptr) log_->Truncate();
  ++flushes_;
}

void
BBTree::BulkInsert(std::span<const Entry> sorted)
{
  if (sorted.empty()) return;
  for (const auto &e : sorted) {
    if (buffer_.contains(e.key)) {
      FlushBuffer();
      break;
    }
  }
  tree_.Bulkload(sorted);
}

std::optional<Entry>
BBTree::PointSearch(Key key)
{
  if (auto it = buffer_.find(key); it != buffer_.end()) {
    if (!it->second.inserts.empty()) return Entry{key, it->second.inserts.front(), false};
    if (it->second.tombstone) return std::nullopt;
  }
  return tree_.PointSearch(key);
}

std::vector<Entry>
BBTree::RangeSearch(Key lo, Key hi)
{
  auto out = tree_.RangeSearch(lo, hi);
  const auto first = buffer_.lower_bound(lo);
  const auto last = buffer_.upper_bound(hi);
  if (first == last) return out;
  std::erase_if(out, [&](const Entry &e) {
    auto it = buffer_.find(e.key);
    return it != buffer_.end() && it->second.tombstone;
  });
  for (auto it = first; it != last; ++it) {
    for (Rid rid : it->second.inserts) out.push_back(Entry{it->first, rid, false});
  }
  std::sort(out.begin(), out.end(), EntryLess{});
  return out;
}

void
BBTree::Crash()
{
  buffer_.clear();
  buffered_ = 0;
  tree_.Crash();
  if (log_ != nullptr) log_->Crash();
}

void
BBTree::Recover()
{
  tree_.Recover();
  if (log_ == nullptr) return;
  for (const auto &e : log_->Recover()) {
    if (e.tombstone) {
      BufferDelete(e.key);
    } else {
      BufferInsert(e);
    }
  }
}

IndexStats
BBTree::Stats() const
{
  auto s = tree_.Stats();
  s.buffered = buffered_;
  s.flushes = flushes_;
  return s;
}

}  // namespace pam
