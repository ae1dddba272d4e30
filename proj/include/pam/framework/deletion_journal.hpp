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

#include <set>
#include <string>

#include "pam/index/pcm_log.hpp"

namespace pam
{
/// Persistent set of deleted keys: a PCM log with an ordered DRAM mirror for lookups.
class DeletionJournal
{
 public:
  explicit DeletionJournal(pcm::SimDevice &device) : log_{device} {}

  /// Appends the key unless it is already present; returns whether it was added.
  bool Add(Key key);
  [[nodiscard]] bool Contains(Key key) const { return keys_.contains(key); }
  [[nodiscard]] std::size_t Size() const noexcept { return keys_.size(); }
  [[nodiscard]] const std::set<Key> &Keys() const noexcept { return keys_; }

  void Crash() noexcept;
  void Recover();

  /// One key per line with a header row.
  [[nodiscard]] std::string ToCsv() const;

 private:
  PcmLog log_;
  std::set<Key> keys_;
};

}  // namespace pam
