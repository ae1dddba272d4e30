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
#include "pam/framework/interval_set.hpp"

#include <sstream>
#include <stdexcept>

namespace pam
{
void
IntervalSet::Add(Key lo, Key hi)
{
  if (lo > hi) throw std::invalid_argument("inverted range");
  const Key reach_lo = coalesce_ && lo > 0 ? lo - 1 : lo;
  const Key reach_hi = coalesce_ && hi < kKeyInfinity ? hi + 1 : hi;

  // first range that could touch [lo, hi]
  auto it = ranges_.upper_bound(reach_lo);
  if (it != ranges_.begin()) {
    auto prev = std::prev(it);
    if (prev->second >= reach_lo) it = prev;
  }
  while (it != ranges_.end() && it->first <= reach_hi) {
    lo = std::min(lo, it->first);
    hi = std::max(hi, it->second);
    it = ranges_.erase(it);
  }
  ranges_.emplace(lo, hi);
}

std::optional<KeyRange>
IntervalSet::Find(Key k) const
{
  auto it = ranges_.upper_bound(k);
  if (it == ranges_.begin()) return std::nullopt;
  --it;
  if (it->second < k) return std::nullopt;
  return KeyRange{it->first, it->second};
}

bool
IntervalSet::Covers(Key k) const
{
  return Find(k).has_value();
}

bool
IntervalSet::CoversAll(Key lo, Key hi) const
{
  return Gaps(lo, hi).empty();
}

std::vector<KeyRange>
IntervalSet::Gaps(Key lo, Key hi) const
{
  if (lo > hi) throw std::invalid_argument("inverted range");
  std::vector<KeyRange> gaps;
  Key cursor = lo;
  auto it = ranges_.upper_bound(lo);
  if (it != ranges_.begin()) --it;
  for (; it != ranges_.end() && it->first <= hi; ++it) {
    if (it->second < cursor) continue;
    if (it->first > cursor) gaps.push_back(KeyRange{cursor, it->first - 1});
    if (it->second >= hi) return gaps;
    cursor = it->second + 1;
  }
  gaps.push_back(KeyRange{cursor, hi});
  return gaps;
}

std::vector<KeyRange>
IntervalSet::Ranges() const
{
  std::vector<KeyRange> out;
  out.reserve(ranges_.size());
  for (const auto &[lo, hi] : ranges_) out.push_back(KeyRange{lo, hi});
  return out;
}

std::string
IntervalSet::ToCsv() const
{
  std::ostringstream os;
  os << "lo,hi\n";
  for (const auto &[lo, hi] : ranges_) os << lo << ',' << hi << '\n';
  return os.str();
}

}  // namespace pam
