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
#include <doctest.h>

#include <random>
#include <vector>

#include "oracle.hpp"
#include "pam/index/bbtree.hpp"
#include "pam/index/partitioned_btree.hpp"
#include "pam/index/pcm_btree.hpp"

using namespace pam;

namespace
{
std::vector<Entry>
Dense(Key n, Key step = 1)
{
  std::vector<Entry> out;
  for (Key k = 0; k < n; ++k) out.push_back(Entry{k * step, k, false});
  return out;
}

}  // namespace

TEST_CASE("unsorted tree delete flips one bit in one line")
{
  pcm::SimDevice dev;
  auto ub = MakeUBTree(dev);
  ub->Bulkload(Dense(200));
  const auto before = dev.Stats();
  ub->Delete(77);
  const auto after = dev.Stats();
  CHECK(after.line_flushes - before.line_flushes == 1);
  CHECK(after.bits_modified - before.bits_modified == 1);
  CHECK_FALSE(ub->PointSearch(77).has_value());
}

TEST_CASE("unsorted tree appends without touching other slots")
{
  pcm::SimDevice dev;
  auto ub = MakeUBTree(dev);
  ub->Bulkload(Dense(20, 10));
  const auto before = dev.Stats();
  ub->Insert(Entry{55, 1, false});
  // one slot line plus the header
  CHECK(dev.Stats().line_flushes - before.line_flushes == 2);
}

TEST_CASE("partitioned tree shifts the tail on a middle insert")
{
  pcm::SimDevice dev;
  PartitionedBTree pbt{dev};
  for (const auto &e : Dense(20, 10)) pbt.Insert(e);
  auto before = dev.Stats();
  pbt.Insert(Entry{95, 1, false});  // lands at position 10, moving ten entries
  // slots 10..20 occupy lines 2..5, plus the header line
  CHECK(dev.Stats().line_flushes - before.line_flushes == 5);

  before = dev.Stats();
  pbt.Insert(Entry{1000, 2, false});  // appended at the tail
  CHECK(dev.Stats().line_flushes - before.line_flushes == 2);
}

TEST_CASE("partitioned tree ignores deletes of absent keys")
{
  pcm::SimDevice dev;
  PartitionedBTree pbt{dev};
  for (const auto &e : Dense(50, 2)) pbt.Insert(e);
  const auto before = dev.Stats();
  pbt.Delete(3);
  CHECK(dev.Stats().line_flushes == before.line_flushes);
  CHECK(pbt.Stats().absent_tombstones == 1);
  CHECK_FALSE(pbt.Erase(4, 999));
  CHECK(pbt.Erase(4, 2));
  CHECK_FALSE(pbt.PointSearch(4).has_value());
}

TEST_CASE("partition ids ride in the high rid bits")
{
  const Rid packed = PackPartitionRid(513, 123456789);
  CHECK(PartitionOf(packed) == 513);
  CHECK(RowOf(packed) == 123456789);
  CHECK(PartitionOf(PackPartitionRid(0, kRowMask)) == 0);
}

TEST_CASE("partitioned tree matches the shadow oracle")
{
  for (std::size_t fanout : {4, 32}) {
    CAPTURE(fanout);
    pcm::SimDevice dev;
    PartitionedBTree pbt{dev, fanout};
    testing::ShadowIndex shadow;
    std::mt19937_64 rng{fanout};
    Rid rid = 1;
    for (int i = 0; i < 6000; ++i) {
      const auto dice = rng() % 10;
      const Key k = rng() % 700;
      if (dice < 5) {
        if (shadow.Range(k, k).size() >= fanout / 2) continue;
        pbt.Insert(Entry{k, rid, false});
        shadow.Insert(k, rid++);
      } else if (dice < 7) {
        pbt.Delete(k);
        shadow.Delete(k);
      } else if (dice < 8) {
        const auto copies = shadow.Range(k, k);
        if (copies.empty()) continue;
        REQUIRE(pbt.Erase(k, copies.back().rid));
        shadow.Erase(k, copies.back().rid);
      } else {
        const Key hi = k + rng() % 60;
        REQUIRE(pbt.RangeSearch(k, hi) == shadow.Range(k, hi));
        REQUIRE(pbt.PointSearch(k).has_value() == shadow.Contains(k));
      }
    }
    const auto all = pbt.RangeSearch(0, 1000);
    CHECK(all == shadow.Range(0, 1000));
    pbt.Crash();
    pbt.Recover();
    CHECK(pbt.RangeSearch(0, 1000) == all);
  }
}

TEST_CASE("sorted sections cut the lines read by point searches")
{
  pcm::SimDevice dev_sb;
  pcm::SimDevice dev_ub;
  auto sb = MakeSBTree(dev_sb);
  auto ub = MakeUBTree(dev_ub);
  sb->Bulkload(Dense(20000));
  ub->Bulkload(Dense(20000));
  dev_sb.ResetStats();
  dev_ub.ResetStats();
  std::mt19937_64 rng{8};
  for (int i = 0; i < 2000; ++i) {
    const Key k = rng() % 20000;
    CHECK(sb->PointSearch(k).has_value());
    CHECK(ub->PointSearch(k).has_value());
  }
  CHECK(dev_sb.Stats().reads < dev_ub.Stats().reads);
}
