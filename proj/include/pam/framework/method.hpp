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
#include <span>
#include <string_view>
#include <vector>

#include "pam/index/entry.hpp"
#include "pam/index/merge_index.hpp"

namespace pam
{
/**
 * @brief Common driver interface of the adaptive merging methods (PAM, AM, eAM).
 *
 * Entries start out in unsorted-input order in partitions; range searches move
 * the entries they touch into the merge index. All methods must return the
 * same result multiset for the same trace.
 */
class AdaptiveMethod
{
 public:
  virtual ~AdaptiveMethod() = default;

  [[nodiscard]] virtual std::string_view Name() const = 0;

  virtual void Initialize(std::span<const Entry> dataset) = 0;
  /// Live entries with keys in [lo, hi], sorted. Throws std::invalid_argument if lo > hi.
  virtual std::vector<Entry> Search(Key lo, Key hi) = 0;
  virtual void Insert(const Entry &e) = 0;
  virtual void Delete(Key key) = 0;
  virtual void Update(Key key, Rid new_rid)
  {
    Delete(key);
    Insert(Entry{key, new_rid, false});
  }
  /// Point lookup; does not merge.
  virtual std::vector<Entry> Lookup(Key key) = 0;

  /// True once every partition has been freed.
  [[nodiscard]] virtual bool Converged() const = 0;
  [[nodiscard]] virtual std::size_t PartitionCount() const = 0;
  [[nodiscard]] virtual IndexStats IndexStatistics() const = 0;

  /// Drains DRAM-side buffering to PCM at the end of a run.
  virtual void Sync() {}
};

}  // namespace pam
