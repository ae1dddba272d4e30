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
#include <vector>

#include "pam/index/entry.hpp"
#include "pam/pcm/device.hpp"

namespace pam
{
/**
 * @brief Persistent append-only log of entries on PCM.
 *
 * Backs the entry log (buffered-but-unflushed index operations) and the
 * deletion journal. The log is a chain of fixed-size chunks; the first line of
 * each chunk holds the epoch (head chunk only) and the link to the next chunk.
 * A record is 16 bytes: the key, then a word packing the rid (low 48 bits),
 * the epoch (14 bits), a valid bit and the tombstone bit. Truncation bumps the
 * epoch in the head chunk, so stale records stop a replay without being erased.
 *
 * The head chunk's region is the log's fixed root address and survives a crash.
 */
class PcmLog
{
 public:
  static constexpr Rid kMaxRid = (Rid{1} << 48) - 1;
  static constexpr std::size_t kDefaultChunkBytes = 4096;

  explicit PcmLog(pcm::SimDevice &device, std::size_t chunk_bytes = kDefaultChunkBytes);

  PcmLog(const PcmLog &) = delete;
  PcmLog &operator=(const PcmLog &) = delete;

  /// Persists one record. Throws std::invalid_argument if the rid exceeds 48 bits.
  pcm::WriteReceipt Append(const Entry &e);

  /// Logically empties the log with a single header write.
  pcm::WriteReceipt Truncate();

  /// Charged scan of the persisted records in append order.
  [[nodiscard]] std::vector<Entry> Replay();

  /// Drops the DRAM cursor state, keeping only the head chunk address.
  void Crash() noexcept;
  /// Rebuilds the cursor from PCM and returns the surviving records.
  std::vector<Entry> Recover();

  /// Releases every chunk back to the device.
  void Release();

  [[nodiscard]] std::size_t Size() const noexcept { return size_; }
  [[nodiscard]] const pcm::Region &HeadRegion() const noexcept { return chunks_.front(); }

 private:
  [[nodiscard]] std::size_t RecordsPerChunk() const noexcept;
  void WriteChunkHeader(std::size_t chunk_idx);

  pcm::SimDevice *device_;
  std::size_t chunk_bytes_;
  std::vector<pcm::Region> chunks_;
  std::uint64_t epoch_{1};
  std::size_t size_{0};
};

}  // namespace pam
