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
#include "pam/index/pcm_log.hpp"

#include <array>
#include <cstring>
#include <stdexcept>

namespace pam
{
namespace
{
constexpr std::size_t kHeaderBytes = 64;
constexpr std::uint64_t kNoChunk = ~std::uint64_t{0};
constexpr std::uint64_t kEpochMask = 0x3fff;
constexpr std::uint64_t kValidBit = std::uint64_t{1} << 62;
constexpr std::uint64_t kTombstoneBit = std::uint64_t{1} << 63;

std::uint64_t
PackMeta(const Entry &e, std::uint64_t epoch) noexcept
{
  return (e.rid & PcmLog::kMaxRid) | ((epoch & kEpochMask) << 48) | kValidBit
         | (e.tombstone ? kTombstoneBit : 0);
}

template <class T>
T
Load(const std::byte *p) noexcept
{
  T v{};
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace

PcmLog::PcmLog(pcm::SimDevice &device, std::size_t chunk_bytes) : device_{&device}, chunk_bytes_{chunk_bytes}
{
  if (chunk_bytes_ < 2 * kHeaderBytes || chunk_bytes_ % kHeaderBytes != 0) {
    throw std::invalid_argument("log chunk must be a multiple of 64 bytes holding at least one record line");
  }
  chunks_.push_back(device_->Alloc(chunk_bytes_));
  WriteChunkHeader(0);
}

std::size_t
PcmLog::RecordsPerChunk() const noexcept
{
  return (chunk_bytes_ - kHeaderBytes) / kEntryBytes;
}

void
PcmLog::WriteChunkHeader(std::size_t chunk_idx)
{
  std::array<std::byte, 24> hdr{};
  const std::uint64_t epoch = chunk_idx == 0 ? epoch_ : 0;
  std::uint64_t next = kNoChunk;
  std::uint64_t next_len = 0;
  if (chunk_idx + 1 < chunks_.size()) {
    next = chunks_[chunk_idx + 1].base;
    next_len = chunks_[chunk_idx + 1].length;
  }
  std::memcpy(hdr.data(), &epoch, 8);
  std::memcpy(hdr.data() + 8, &next, 8);
  std::memcpy(hdr.data() + 16, &next_len, 8);
  device_->Write(chunks_[chunk_idx], 0, hdr);
}

pcm::WriteReceipt
PcmLog::Append(const Entry &e)
{
  if (e.rid > kMaxRid) throw std::invalid_argument("rid does not fit the 48-bit log encoding");
  const auto per_chunk = RecordsPerChunk();
  const std::size_t chunk = size_ / per_chunk;
  if (chunk == chunks_.size()) {
    chunks_.push_back(device_->Alloc(chunk_bytes_));
    WriteChunkHeader(chunk - 1);
  }
  std::array<std::byte, kEntryBytes> rec{};
  const std::uint64_t meta = PackMeta(e, epoch_);
  std::memcpy(rec.data(), &e.key, 8);
  std::memcpy(rec.data() + 8, &meta, 8);
  const auto receipt = device_->Write(chunks_[chunk], kHeaderBytes + (size_ % per_chunk) * kEntryBytes, rec);
  ++size_;
  return receipt;
}

pcm::WriteReceipt
PcmLog::Truncate()
{
  const auto before = device_->SimTime();
  ++epoch_;
  WriteChunkHeader(0);
  size_ = 0;
  pcm::WriteReceipt r{};
  r.cost_ns = device_->SimTime() - before;
  r.lines_flushed = r.cost_ns > 0 ? 1 : 0;
  return r;
}

std::vector<Entry>
PcmLog::Replay()
{
  std::vector<Entry> out;
  std::array<std::byte, 64> line{};
  pcm::Region chunk = chunks_.front();
  device_->Read(chunk, 0, line);
  const std::uint64_t epoch = Load<std::uint64_t>(line.data()) & kEpochMask;

  while (true) {
    std::uint64_t next = Load<std::uint64_t>(line.data() + 8);
    std::uint64_t next_len = Load<std::uint64_t>(line.data() + 16);
    for (std::size_t off = kHeaderBytes; off < chunk.length; off += line.size()) {
      device_->Read(chunk, off, line);
      for (std::size_t r = 0; r < line.size(); r += kEntryBytes) {
        const auto key = Load<std::uint64_t>(line.data() + r);
        const auto meta = Load<std::uint64_t>(line.data() + r + 8);
        if ((meta & kValidBit) == 0 || ((meta >> 48) & kEpochMask) != epoch) return out;
        out.push_back(Entry{key, meta & kMaxRid, (meta & kTombstoneBit) != 0});
      }
    }
    if (next == kNoChunk || next_len == 0) return out;
    chunk = pcm::Region{next, static_cast<std::size_t>(next_len)};
    device_->Read(chunk, 0, line);
  }
}

void
PcmLog::Crash() noexcept
{
  chunks_.resize(1);
  size_ = 0;
  epoch_ = 0;
}

std::vector<Entry>
PcmLog::Recover()
{
  std::array<std::byte, 24> hdr{};
  device_->Read(chunks_.front(), 0, hdr);
  epoch_ = Load<std::uint64_t>(hdr.data());
  std::uint64_t next = Load<std::uint64_t>(hdr.data() + 8);
  std::uint64_t next_len = Load<std::uint64_t>(hdr.data() + 16);
  // a freshly allocated tail chunk has an all-zero header, so a zero length also ends the chain
  while (next != kNoChunk && next_len != 0) {
    chunks_.push_back(pcm::Region{next, static_cast<std::size_t>(next_len)});
    device_->Read(chunks_.back(), 0, hdr);
    next = Load<std::uint64_t>(hdr.data() + 8);
    next_len = Load<std::uint64_t>(hdr.data() + 16);
  }
  auto records = Replay();
  size_ = records.size();
  return records;
}

void
PcmLog::Release()
{
  for (const auto &c : chunks_) device_->Free(c);
  chunks_.clear();
}

}  // namespace pam
