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

// Test-side reference models. They share no code with the library.

#include <cstddef>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "pam/index/entry.hpp"

namespace pam::testing
{
struct DiffOracle {
  std::uint64_t words{0};
  std::uint64_t bits{0};
};

/// Byte-and-bit loop diff of one 64 B line.
inline DiffOracle
DiffLineOracle(const unsigned char *a, const unsigned char *b)
{
  DiffOracle d;
  for (int w = 0; w < 8; ++w) {
    bool word_changed = false;
    for (int i = 0; i < 8; ++i) {
      unsigned x = a[w * 8 + i] ^ b[w * 8 + i];
      if (x != 0) word_changed = true;
      for (; x != 0; x >>= 1) d.bits += x & 1U;
    }
    if (word_changed) ++d.words;
  }
  return d;
}

/// Sorted multiset of (key, rid) with delete-all-by-key semantics.
class ShadowIndex
{
 public:
  void Insert(Key k, Rid r) { set_.emplace(k, r); }
  void Delete(Key k) { set_.erase(set_.lower_bound({k, 0}), set_.lower_bound({k + 1, 0})); }
  void Erase(Key k, Rid r) { set_.erase({k, r}); }
  [[nodiscard]] bool Contains(Key k) const
  {
    auto it = set_.lower_bound({k, 0});
    return it != set_.end() && it->first == k;
  }
  [[nodiscard]] std::vector<Entry> Range(Key lo, Key hi) const
  {
    std::vector<Entry> out;
    for (auto it = set_.lower_bound({lo, 0}); it != set_.end() && it->first <= hi; ++it)
      out.push_back(Entry{it->first, it->second, false});
    return out;
  }
  [[nodiscard]] std::size_t Size() const { return set_.size(); }
  [[nodiscard]] std::vector<Key> Keys() const
  {
    std::vector<Key> out;
    for (const auto &[k, r] : set_)
      if (out.empty() || out.back() != k) out.push_back(k);
    return out;
  }

 private:
  std::set<std::pair<Key, Rid>> set_;
};

}  // namespace pam::testing
