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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pam/index/entry.hpp"

namespace pam
{
/// Closed key range [lo, hi].
struct KeyRange {
  Key lo{0};
  Key hi{0};

  bool operator==(const KeyRange &) const = default;
};

/**
 * @brief Ordered set of disjoint closed key ranges.
 *
 * With coalescing on, overlapping and adjacent ranges merge as they are added,
 * so the set always holds maximal ranges. Without it only overlapping ranges
 * merge.
 */
class IntervalSet
{
 public:
  explicit IntervalSet(bool coalesce_adjacent = true) : coalesce_{coalesce_adjacent} {}

  /// Throws std::invalid_argument if lo > hi.
  void Add(Key lo, Key hi);
  [[nodiscard]] bool Covers(Key k) const;
  /// The stored range containing k, if any.
  [[nodiscard]] std::optional<KeyRange> Find(Key k) const;
  /// True if every key of [lo, hi] is covered.
  [[nodiscard]] bool CoversAll(Key lo, Key hi) const;
  /// Maximal sub-ranges of [lo, hi] not covered, in key order.
  [[nodiscard]] std::vector<KeyRange> Gaps(Key lo, Key hi) const;

  [[nodiscard]] std::vector<KeyRange> Ranges() const;
  [[nodiscard]] std::size_t Size() const noexcept { return ranges_.size(); }
  [[nodiscard]] bool Empty() const noexcept { return ranges_.empty(); }
  void Clear() noexcept { ranges_.clear(); }

  /// `lo,hi` per line with a header row.
  [[nodiscard]] std::string ToCsv() const;

 private:
  bool coalesce_;
  std::map<Key, Key> ranges_;  // lo -> hi
};

}  // namespace pam
