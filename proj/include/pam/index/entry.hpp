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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace pam
{
using Key = std::uint64_t;
using Rid = std::uint64_t;

inline constexpr Key kKeyMin = 0;
/// Routing sentinel: the last separator of every inner node.
inline constexpr Key kKeyInfinity = std::numeric_limits<Key>::max();

/// Encoded size of an entry on PCM.
inline constexpr std::size_t kEntryBytes = 16;

/**
 * @brief A merge-index element: key plus record identifier.
 *
 * The tombstone ("ToDelete") mark never reaches a leaf; it only lives in DRAM
 * buffers, bulkload batches and logs. A tombstone deletes every entry with
 * its key.
 */
struct Entry {
  Key key{0};
  Rid rid{0};
  bool tombstone{false};

  friend constexpr bool operator==(const Entry &, const Entry &) = default;
};

/// Total order used for result sets: key, then rid.
struct EntryLess {
  constexpr bool operator()(const Entry &a, const Entry &b) const noexcept
  {
    return a.key != b.key ? a.key < b.key : a.rid < b.rid;
  }
};

void EncodeEntry(const Entry &e, std::span<std::byte, kEntryBytes> out) noexcept;
Entry DecodeEntry(std::span<const std::byte, kEntryBytes> in) noexcept;

}  // namespace pam
