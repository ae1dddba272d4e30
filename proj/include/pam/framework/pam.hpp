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

#include <memory>
#include <string>

#include "pam/framework/deletion_journal.hpp"
#include "pam/framework/interval_set.hpp"
#include "pam/framework/method.hpp"
#include "pam/framework/partition_store.hpp"
#include "pam/index/bbtree.hpp"

namespace pam
{
struct PamConfig {
  IndexKind index{IndexKind::kBB};
  BBTreeConfig tree{};
  std::size_t partition_capacity{PartitionStore::kDefaultCapacity};
  bool journal_coalesce{true};
  bool entry_log{true};  // only meaningful for the buffered index

  bool Set(const std::string &key, const std::string &value);
};

/**
 * @brief Adaptive merging over PCM with journals instead of partition rewrites.
 *
 * Partitions are immutable once written. Which of their entries are still
 * live is tracked by two journals: the insertion journal (key ranges already
 * copied into the index, DRAM) and the deletion journal (PCM). Partition
 * descriptors keep min/max of the live keys, so a search only reads partitions
 * that can still contribute.
 */
class Pam : public AdaptiveMethod
{
 public:
  explicit Pam(pcm::SimDevice &device, PamConfig config = {});

  [[nodiscard]] std::string_view Name() const override { return "pam"; }

  void Initialize(std::span<const Entry> dataset) override;
  std::vector<Entry> Search(Key lo, Key hi) override;
  void Insert(const Entry &e) override;
  void Delete(Key key) override;
  std::vector<Entry> Lookup(Key key) override;

  [[nodiscard]] bool Converged() const override { return store_.Empty(); }
  [[nodiscard]] std::size_t PartitionCount() const override { return store_.Partitions().size(); }
  [[nodiscard]] IndexStats IndexStatistics() const override { return index_->Stats(); }
  void Sync() override { index_->Sync(); }

  /// Simulated power loss: every DRAM structure is dropped.
  void Crash();
  void Recover();

  [[nodiscard]] const IntervalSet &InsertionJournal() const noexcept { return journal_; }
  [[nodiscard]] const DeletionJournal &Deletions() const noexcept { return deletions_; }
  [[nodiscard]] PartitionStore &Store() noexcept { return store_; }
  [[nodiscard]] MergeIndex &Index() noexcept { return *index_; }
  [[nodiscard]] const PamConfig &Config() const noexcept { return config_; }

 private:
  [[nodiscard]] std::optional<KeyRange> DeadRange(Key k) const;
  void Refresh(std::uint32_t id);

  pcm::SimDevice *device_;
  PamConfig config_;
  std::unique_ptr<MergeIndex> index_;
  PartitionStore store_;
  IntervalSet journal_;
  DeletionJournal deletions_;
};

}  // namespace pam
