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

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "pam/framework/pam.hpp"
#include "pam/merging/adaptive_merging.hpp"

using namespace pam;

namespace
{
std::vector<Entry>
Shuffled(Key n, std::uint64_t seed)
{
  std::vector<Entry> out;
  for (Key k = 0; k < n; ++k) out.push_back(Entry{k, k, false});
  std::mt19937_64 rng{seed};
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

AmConfig
WithInvalidation(Invalidation inv)
{
  AmConfig c = MakeEamConfig();
  c.invalidation = inv;
  c.partition_capacity = 1024;
  return c;
}

}  // namespace

TEST_CASE("invalidating 512 neighbours: flags, bitmap, journal")
{
  std::vector<std::size_t> positions(512);
  std::iota(positions.begin(), positions.end(), 0);
  const std::pair<Invalidation, std::uint64_t> expected[] = {
      {Invalidation::kFlag, 8}, {Invalidation::kBitmap, 1}, {Invalidation::kJournal, 0}};
  for (const auto &[inv, lines] : expected) {
    CAPTURE(InvalidationName(inv));
    pcm::SimDevice dev;
    AdaptiveMerging am{dev, WithInvalidation(inv), "am"};
    am.Initialize(Shuffled(1024, 1));
    const auto r = am.Invalidate(0, positions);
    CHECK(r.lines_flushed == lines);
    if (inv == Invalidation::kJournal) CHECK(r.cost_ns == 0);
    if (inv == Invalidation::kBitmap) CHECK(r.cost_ns == 1000 + 50);  // read-modify-write of one line
    CHECK(am.InvalidationTime() == r.cost_ns);
  }
}

TEST_CASE("flags and bitmaps start valid without any write")
{
  for (Invalidation inv : {Invalidation::kFlag, Invalidation::kBitmap}) {
    pcm::SimDevice dev;
    AdaptiveMerging am{dev, WithInvalidation(inv), "am"};
    const auto data = Shuffled(3000, 2);
    const auto before = dev.Stats().line_flushes;
    am.Initialize(data);
    const auto partitions_only = dev.Stats().line_flushes - before;
    pcm::SimDevice ref;
    PartitionStore store{ref, 1024};
    store.Initialize(data);
    CHECK(partitions_only == ref.Stats().line_flushes);
  }
}

TEST_CASE("a merged entry is never returned twice")
{
  pcm::SimDevice dev;
  AdaptiveMerging am{dev, MakeAmConfig(), "am"};
  am.Initialize(Shuffled(500, 3));
  CHECK(am.Search(100, 199).size() == 100);
  CHECK(am.Search(100, 199).size() == 100);
  CHECK(am.Search(150, 250).size() == 101);
  CHECK(am.Index().RangeSearch(0, 1000).size() == 151);
}

TEST_CASE("pooled deletes hide keys until they are applied")
{
  pcm::SimDevice dev;
  AmConfig cfg = MakeEamConfig();
  cfg.pool_capacity = 3;
  AdaptiveMerging eam{dev, cfg, "eam"};
  eam.Initialize(Shuffled(100, 4));
  eam.Delete(10);
  eam.Delete(11);
  CHECK(eam.Pool().Size() == 2);
  CHECK(eam.Search(9, 12).size() == 2);
  CHECK(eam.Lookup(10).empty());
  eam.Delete(12);  // the pool is full: everything is applied
  CHECK(eam.Pool().Size() == 0);
  CHECK(eam.Search(9, 13).size() == 2);
  eam.Delete(50);
  eam.Insert(Entry{50, 7, false});  // a re-insert applies the pending delete first
  CHECK(eam.Search(50, 50) == std::vector<Entry>{{50, 7, false}});
  eam.Delete(60);
  eam.Sync();
  CHECK(eam.Pool().Size() == 0);
  CHECK(eam.Lookup(60).empty());
}

TEST_CASE("partitions are released once fully merged")
{
  pcm::SimDevice dev;
  AdaptiveMerging am{dev, WithInvalidation(Invalidation::kBitmap), "eam"};
  am.Initialize(Shuffled(3000, 5));
  CHECK(am.PartitionCount() == 3);
  am.Search(0, 1499);
  CHECK_FALSE(am.Converged());
  am.Search(1500, 2999);
  CHECK(am.Converged());
}

TEST_CASE("all methods agree on a random trace")
{
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    CAPTURE(seed);
    std::vector<std::unique_ptr<pcm::SimDevice>> devices;
    std::vector<std::unique_ptr<AdaptiveMethod>> methods;
    auto device = [&] { return devices.emplace_back(std::make_unique<pcm::SimDevice>()).get(); };
    AmConfig am = MakeAmConfig();
    am.partition_capacity = 128;
    methods.push_back(std::make_unique<AdaptiveMerging>(*device(), am, "am"));
    for (Invalidation inv : {Invalidation::kFlag, Invalidation::kBitmap, Invalidation::kJournal}) {
      AmConfig c = WithInvalidation(inv);
      c.partition_capacity = 128;
      c.pool_capacity = 16;
      methods.push_back(std::make_unique<AdaptiveMerging>(*device(), c, "eam"));
    }
    PamConfig pc;
    pc.partition_capacity = 128;
    pc.tree.buffer_threshold = 64;
    methods.push_back(std::make_unique<Pam>(*device(), pc));

    const auto data = Shuffled(1500, seed);
    for (auto &m : methods) m->Initialize(data);
    testing::ShadowIndex shadow;
    for (const auto &e : data) shadow.Insert(e.key, e.rid);

    std::mt19937_64 rng{seed + 100};
    Rid rid = 5000;
    for (int i = 0; i < 2500; ++i) {
      const auto dice = rng() % 10;
      const Key k = rng() % 1600;
      if (dice < 5) {
        const Key hi = k + rng() % 50;
        const auto expect = shadow.Range(k, hi);
        for (auto &m : methods) REQUIRE(m->Search(k, hi) == expect);
      } else if (dice < 7) {
        for (auto &m : methods) m->Insert(Entry{k, rid, false});
        shadow.Insert(k, rid++);
      } else if (dice < 9) {
        for (auto &m : methods) m->Delete(k);
        shadow.Delete(k);
      } else {
        for (auto &m : methods) m->Update(k, rid);
        shadow.Delete(k);
        shadow.Insert(k, rid++);
      }
    }
    for (auto &m : methods) {
      m->Sync();
      CHECK(m->Search(0, 2000) == shadow.Range(0, 2000));
    }
  }
}

TEST_CASE("invalidation names and config keys")
{
  CHECK(ParseInvalidation("flag") == Invalidation::kFlag);
  CHECK(ParseInvalidation("bitmap") == Invalidation::kBitmap);
  CHECK(ParseInvalidation("journal") == Invalidation::kJournal);
  CHECK_THROWS_AS(ParseInvalidation("bits"), std::invalid_argument);
  AmConfig c;
  CHECK(c.Set("invalidation", "journal"));
  CHECK(c.invalidation == Invalidation::kJournal);
  CHECK(c.Set("pool_capacity", "12"));
  CHECK(c.pool_capacity == 12);
  CHECK(MakeAmConfig().index == IndexKind::kPartitioned);
  CHECK(MakeEamConfig().index == IndexKind::kUB);
  CHECK(MakeEamConfig().invalidation == Invalidation::kBitmap);
}
