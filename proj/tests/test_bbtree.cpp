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

using namespace pam;

namespace
{
BBTreeConfig
SmallBuffer(std::size_t threshold)
{
  BBTreeConfig c;
  c.buffer_threshold = threshold;
  return c;
}

}  // namespace

TEST_CASE("buffered operations stay in DRAM until the threshold")
{
  pcm::SimDevice dev;
  BBTree bb{dev, SmallBuffer(7)};
  const auto before = dev.Stats();
  for (Key k = 1; k <= 6; ++k) bb.Insert(Entry{k, k, false});
  CHECK(bb.BufferedOps() == 6);
  CHECK(dev.Stats().line_flushes == before.line_flushes);
  CHECK(bb.Tree().Empty());
  bb.Insert(Entry{7, 7, false});
  CHECK(bb.BufferedOps() == 0);
  CHECK(bb.Stats().entries == 7);
  CHECK(bb.Stats().flushes == 1);
}

TEST_CASE("a later delete cancels buffered inserts of the same key")
{
  pcm::SimDevice dev;
  BBTree bb{dev, SmallBuffer(100)};
  bb.Insert(Entry{7, 1, false});
  bb.Insert(Entry{7, 2, false});
  bb.Delete(7);
  CHECK(bb.BufferedOps() == 1);
  CHECK_FALSE(bb.PointSearch(7).has_value());
  bb.Insert(Entry{7, 3, false});
  CHECK(bb.BufferedOps() == 2);
  REQUIRE(bb.PointSearch(7).has_value());
  CHECK(bb.PointSearch(7)->rid == 3);
  bb.FlushBuffer();
  // the tombstone found nothing in the tree; the last insert survives
  CHECK(bb.Stats().absent_tombstones == 1);
  CHECK(bb.RangeSearch(0, 10) == std::vector<Entry>{Entry{7, 3, false}});
}

TEST_CASE("flushing an empty buffer writes nothing")
{
  pcm::SimDevice dev;
  BBTree bb{dev, SmallBuffer(16)};
  const auto before = dev.Stats();
  bb.FlushBuffer();
  bb.Sync();
  CHECK(dev.Stats().line_flushes == before.line_flushes);
  CHECK(bb.Stats().flushes == 0);
}

TEST_CASE("searches overlay the buffer on the tree")
{
  pcm::SimDevice dev;
  BBTree bb{dev, SmallBuffer(1000)};
  std::vector<Entry> base;
  for (Key k = 0; k < 100; ++k) base.push_back(Entry{k * 2, k, false});
  bb.BulkInsert(base);
  bb.Delete(10);
  bb.Insert(Entry{11, 500, false});
  CHECK_FALSE(bb.PointSearch(10).has_value());
  CHECK(bb.PointSearch(11)->rid == 500);
  CHECK(bb.PointSearch(12)->rid == 6);
  std::vector<Key> keys;
  for (const auto &e : bb.RangeSearch(8, 14)) keys.push_back(e.key);
  CHECK(keys == std::vector<Key>{8, 11, 12, 14});
}

TEST_CASE("bulk insert flushes a buffer that shares keys with the batch")
{
  pcm::SimDevice dev;
  BBTree bb{dev, SmallBuffer(1000)};
  bb.Insert(Entry{5, 1, false});
  bb.Insert(Entry{50, 2, false});
  const std::vector<Entry> unrelated{{100, 3, false}, {101, 4, false}};
  bb.BulkInsert(unrelated);
  CHECK(bb.BufferedOps() == 2);
  const std::vector<Entry> overlapping{{5, 9, false}, {200, 10, false}};
  bb.BulkInsert(overlapping);
  CHECK(bb.BufferedOps() == 0);
  CHECK(bb.RangeSearch(0, 1000).size() == 6);
}

TEST_CASE("random traces match the shadow oracle across flushes")
{
  for (std::size_t threshold : {1, 5, 64, 1000}) {
    CAPTURE(threshold);
    pcm::SimDevice dev;
    BBTree bb{dev, SmallBuffer(threshold)};
    testing::ShadowIndex shadow;
    std::mt19937_64 rng{threshold};
    Rid rid = 1;
    for (int i = 0; i < 8000; ++i) {
      const auto dice = rng() % 10;
      const Key k = rng() % 1500;
      if (dice < 5) {
        if (shadow.Range(k, k).size() >= 4) continue;
        bb.Insert(Entry{k, rid, false});
        shadow.Insert(k, rid++);
      } else if (dice < 8) {
        bb.Delete(k);
        shadow.Delete(k);
      } else {
        const Key hi = k + rng() % 50;
        REQUIRE(bb.RangeSearch(k, hi) == shadow.Range(k, hi));
        REQUIRE(bb.PointSearch(k).has_value() == shadow.Contains(k));
      }
    }
    bb.Sync();
    CHECK(bb.RangeSearch(0, 2000) == shadow.Range(0, 2000));
  }
}

TEST_CASE("the entry log restores the buffer after a crash")
{
  pcm::SimDevice dev;
  BBTree bb{dev, SmallBuffer(50)};
  bb.EnableEntryLog();
  REQUIRE(bb.HasEntryLog());
  testing::ShadowIndex shadow;
  std::mt19937_64 rng{3};
  for (int i = 0; i < 420; ++i) {
    const Key k = rng() % 300;
    if (rng() % 4 == 0) {
      bb.Delete(k);
      shadow.Delete(k);
    } else if (!shadow.Contains(k)) {
      bb.Insert(Entry{k, static_cast<Rid>(i + 1), false});
      shadow.Insert(k, static_cast<Rid>(i + 1));
    }
  }
  REQUIRE(bb.BufferedOps() > 0);
  const auto buffered = bb.BufferedOps();
  bb.Crash();
  bb.Recover();
  CHECK(bb.BufferedOps() == buffered);
  CHECK(bb.RangeSearch(0, 400) == shadow.Range(0, 400));
}

TEST_CASE("without the entry log a crash loses only the buffer")
{
  pcm::SimDevice dev;
  BBTree bb{dev, SmallBuffer(4)};
  for (Key k = 0; k < 6; ++k) bb.Insert(Entry{k, k, false});
  bb.Crash();
  bb.Recover();
  CHECK(bb.RangeSearch(0, 10).size() == 4);
}

TEST_CASE("index kinds parse by name")
{
  CHECK(ParseIndexKind("bb") == IndexKind::kBB);
  CHECK(ParseIndexKind("sb") == IndexKind::kSB);
  CHECK(ParseIndexKind("ub") == IndexKind::kUB);
  CHECK(ParseIndexKind("pbt") == IndexKind::kPartitioned);
  CHECK_THROWS_AS(ParseIndexKind("btree"), std::invalid_argument);
  CHECK(IndexKindName(IndexKind::kUB) == "ub");
  BBTreeConfig c;
  CHECK(c.Set("buffer_threshold", "9"));
  CHECK(c.buffer_threshold == 9);
  c.buffer_threshold = 0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
}
