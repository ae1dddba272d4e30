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
#include "pam/framework/pam.hpp"

#include <algorithm>
#include <stdexcept>

namespace pam
{
bool
PamConfig::Set(const std::string &key, const std::string &value)
{
  if (key == "index") {
    index = ParseIndexKind(value);
  } else if (key == "partition_capacity") {
    std::size_t pos = 0;
    partition_capacity = std::stoull(value, &pos);
    if (pos != value.size() || partition_capacity == 0)
      throw std::invalid_argument("invalid value for partition_capacity: " + value);
  } else if (key == "journal_coalesce" || key == "entry_log") {
    bool flag = false;
    if (value == "true" || value == "1") {
      flag = true;
    } else if (value != "false" && value != "0") {
      throw std::invalid_argument("invalid value for " + key + ": " + value);
    }
    (key == "journal_coalesce" ? journal_coalesce : entry_log) = flag;
  } else {
    return tree.Set(key, value);
  }
  return true;
}

Pam::Pam(pcm::SimDevice &device, PamConfig config)
    : device_{&device},
      config_{config},
      index_{MakeMergeIndex(config.index, device, config.tree)},
      store_{device, config.partition_capacity},
      journal_{config.journal_coalesce},
      deletions_{device}
{
  if (config_.index == IndexKind::kPartitioned) throw std::invalid_argument("pam needs a PCM-friendly merge index");
  if (config_.entry_log && config_.index == IndexKind::kBB) static_cast<BBTree &>(*index_).EnableEntryLog();
}

void
Pam::Initialize(std::span<const Entry> dataset)
{
  store_.Initialize(dataset);
}

std::optional<KeyRange>
Pam::DeadRange(Key k) const
{
  if (auto r = journal_.Find(k)) return r;
  if (deletions_.Contains(k)) return KeyRange{k, k};
  return std::nullopt;
}

void
Pam::Refresh(std::uint32_t id)
{
  Partition *p = store_.Find(id);
  if (p == nullptr) return;
  if (p->live == 0 || !store_.AdvanceBounds(*p, [this](Key k) { return DeadRange(k); })) store_.Free(id);
}

std::vector<Entry>
Pam::Search(Key lo, Key hi)
{
  if (lo > hi) throw std::invalid_argument("inverted range");
  auto result = index_->RangeSearch(lo, hi);

  std::vector<Entry> to_insert;
  std::vector<std::uint32_t> touched;
  for (const auto &gap : journal_.Gaps(lo, hi)) {
    for (std::uint32_t id : store_.Overlapping(gap.lo, gap.hi)) {
      Partition &p = *store_.Find(id);
      std::size_t merged = 0;
      for (const auto &hit : store_.Scan(p, gap.lo, gap.hi)) {
        if (deletions_.Contains(hit.entry.key)) continue;
        to_insert.push_back(hit.entry);
        ++merged;
      }
      p.live -= merged;
      touched.push_back(id);
    }
  }

  if (!to_insert.empty()) {
    std::sort(to_insert.begin(), to_insert.end(), EntryLess{});
    index_->BulkInsert(to_insert);
    result.insert(result.end(), to_insert.begin(), to_insert.end());
    std::sort(result.begin(), result.end(), EntryLess{});
  }
  journal_.Add(lo, hi);

  // partitions whose live bounds fall into the newly covered range shrink too
  for (const auto &[id, p] : store_.Partitions()) {
    if ((p.min >= lo && p.min <= hi) || (p.max >= lo && p.max <= hi)) touched.push_back(id);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (std::uint32_t id : touched) Refresh(id);
  return result;
}

void
Pam::Insert(const Entry &e)
{
  index_->Insert(Entry{e.key, e.rid, false});
}

void
Pam::Delete(Key key)
{
  const bool in_index = index_->PointSearch(key).has_value();
  const bool covered = journal_.Covers(key);
  const bool already_deleted = deletions_.Contains(key);

  std::size_t partition_copies = 0;
  if (!covered && !already_deleted) {
    for (std::uint32_t id : store_.Overlapping(key, key)) {
      Partition &p = *store_.Find(id);
      const std::size_t n = store_.Scan(p, key, key).size();
      if (n == 0) continue;
      partition_copies += n;
      p.live -= n;
    }
  }
  if (in_index) index_->Delete(key);
  if ((partition_copies > 0 || (in_index && covered)) && !already_deleted) deletions_.Add(key);
  if (partition_copies > 0) {
    for (std::uint32_t id : store_.Overlapping(key, key)) Refresh(id);
  }
}

std::vector<Entry>
Pam::Lookup(Key key)
{
  auto out = index_->RangeSearch(key, key);
  if (!journal_.Covers(key) && !deletions_.Contains(key)) {
    for (std::uint32_t id : store_.Overlapping(key, key)) {
      for (const auto &hit : store_.Scan(*store_.Find(id), key, key)) out.push_back(hit.entry);
    }
  }
  std::sort(out.begin(), out.end(), EntryLess{});
  return out;
}

void
Pam::Crash()
{
  index_->Crash();
  deletions_.Crash();
  store_.Crash();
  journal_.Clear();
}

void
Pam::Recover()
{
  index_->Recover();
  deletions_.Recover();
  store_.Recover();
  journal_.Clear();

  // a partition entry is live unless its key was deleted or the very entry sits in the index
  const auto resident = index_->RangeSearch(kKeyMin, kKeyInfinity);
  std::vector<Key> unmerged;
  std::vector<std::uint32_t> ids;
  for (const auto &[id, p] : store_.Partitions()) ids.push_back(id);
  for (std::uint32_t id : ids) {
    Partition &p = *store_.Find(id);
    const auto entries = store_.ReadAll(p);
    std::vector<bool> flags(entries.size(), false);
    std::size_t live = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Entry &e = entries[i];
      if (deletions_.Contains(e.key)) continue;
      if (std::binary_search(resident.begin(), resident.end(), e, EntryLess{})) continue;
      flags[i] = true;
      ++live;
      unmerged.push_back(e.key);
    }
    p.live = live;
    if (live == 0) {
      store_.Free(id);
      continue;
    }
    const auto first = static_cast<std::size_t>(std::find(flags.begin(), flags.end(), true) - flags.begin());
    const auto last = flags.size() - 1 -
                      static_cast<std::size_t>(std::find(flags.rbegin(), flags.rend(), true) - flags.rbegin());
    p.min_pos = first;
    p.max_pos = last;
    p.min = entries[first].key;
    p.max = entries[last].key;
  }
  std::sort(unmerged.begin(), unmerged.end());

  // maximal runs of consecutive index-resident keys, broken by keys with live partition copies
  auto has_unmerged = [&](Key k) { return std::binary_search(unmerged.begin(), unmerged.end(), k); };
  std::optional<KeyRange> run;
  for (const auto &e : resident) {
    if (has_unmerged(e.key)) {
      if (run) journal_.Add(run->lo, run->hi);
      run.reset();
      continue;
    }
    if (run && (e.key == run->hi || e.key == run->hi + 1)) {
      run->hi = e.key;
      continue;
    }
    if (run) journal_.Add(run->lo, run->hi);
    run = KeyRange{e.key, e.key};
  }
  if (run) journal_.Add(run->lo, run->hi);
}

}  // namespace pam
