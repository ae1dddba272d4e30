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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pam/index/entry.hpp"

namespace pam
{
struct IndexStats {
  std::uint64_t leaves{0};
  std::uint64_t inner_nodes{0};
  std::uint64_t entries{0};  // valid entries in the PCM-resident part
  std::uint64_t buffered{0};
  std::uint64_t splits{0};
  std::uint64_t merges{0};
  std::uint64_t absent_tombstones{0};
  std::uint64_t flushes{0};
};

/**
 * @brief Behavioural contract shared by every merge index.
 *
 * Duplicate keys are allowed. Delete removes every entry carrying the key.
 * Range results are sorted by key, then rid.
 */
class MergeIndex
{
 public:
  virtual ~MergeIndex() = default;

  [[nodiscard]] virtual std::string_view Name() const = 0;

  virtual void Insert(const Entry &e) = 0;
  virtual void Delete(Key key) = 0;
  /// Merges a key-sorted batch straight into the persistent part of the index.
  virtual void BulkInsert(std::span<const Entry> sorted) = 0;

  virtual std::optional<Entry> PointSearch(Key key) = 0;
  virtual std::vector<Entry> RangeSearch(Key lo, Key hi) = 0;

  /// Drains any DRAM-side buffering into PCM.
  virtual void Sync() {}

  /// Drops all DRAM state, leaving only what is persisted on PCM.
  virtual void Crash() = 0;
  /// Rebuilds DRAM state from PCM after Crash().
  virtual void Recover() = 0;

  [[nodiscard]] virtual IndexStats Stats() const = 0;
};

enum class IndexKind { kBB, kSB, kUB, kPartitioned };

IndexKind ParseIndexKind(std::string_view name);
std::string_view IndexKindName(IndexKind kind);

}  // namespace pam
