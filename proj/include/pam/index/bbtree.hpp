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
#include <memory>
#include <string>
#include <vector>

#include "pam/index/merge_index.hpp"
#include "pam/index/pcm_btree.hpp"
#include "pam/index/pcm_log.hpp"

namespace pam
{
struct BBTreeConfig {
  TreeConfig tree{};
  std::size_t buffer_threshold{4096};  // buffered operations that trigger a flush

  void Validate() const;
  bool Set(const std::string &key, const std::string &value);
};

/**
 * @brief Buffered PCM B+-tree.
 *
 * Inserts and deletes collect in a DRAM buffer keyed by entry key. A delete
 * replaces whatever the buffer holds for its key with a single tombstone. Once
 * the buffer holds `buffer_threshold` operations it is merged into the tree as
 * one sorted batch. Searches see the buffer overlaid on the tree.
 *
 * Optionally every buffered operation is also appended to a PCM entry log, so
 * a crash loses nothing; the log is truncated after each flush.
 */
class BBTree : public MergeIndex
{
 public:
  explicit BBTree(pcm::SimDevice &device, BBTreeConfig config = {});

  [[nodiscard]] std::string_view Name() const override { return "bb"; }

  void Insert(const Entry &e) override;
  void Delete(Key key) override;
  /// Bypasses the buffer, flushing it first if it holds any key of the batch.
  void BulkInsert(std::span<const Entry> sorted) override;
  std::optional<Entry> PointSearch(Key key) override;
  std::vector<Entry> RangeSearch(Key lo, Key hi) override;
  void Sync() override { FlushBuffer(); }
  void Crash() override;
  void Recover() override;
  [[nodiscard]] IndexStats Stats() const override;

  void EnableEntryLog();
  [[nodiscard]] bool HasEntryLog() const noexcept { return log_ != nullptr; }
  void FlushBuffer();

  [[nodiscard]] std::size_t BufferedOps() const noexcept { return buffered_; }
  [[nodiscard]] PcmBTree &Tree() noexcept { return tree_; }
  [[nodiscard]] const BBTreeConfig &Config() const noexcept { return config_; }

 private:
  struct Pending {
    bool tombstone{false};
    std::vector<Rid> inserts;
  };

  void BufferInsert(const Entry &e);
  void BufferDelete(Key key);
  void MaybeFlush();

  pcm::SimDevice *device_;
  BBTreeConfig config_;
  PcmBTree tree_;
  std::map<Key, Pending> buffer_;
  std::size_t buffered_{0};
  std::unique_ptr<PcmLog> log_;
  std::uint64_t flushes_{0};
};

/// Builds an empty index of the given kind over the shared tree geometry.
std::unique_ptr<MergeIndex> MakeMergeIndex(IndexKind kind, pcm::SimDevice &device, const BBTreeConfig &config = {});

}  // namespace pam
