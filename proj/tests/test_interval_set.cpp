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
#include <set>
#include <vector>

#include "pam/framework/deletion_journal.hpp"
#include "pam/framework/interval_set.hpp"

using namespace pam;

TEST_CASE("overlapping and adjacent ranges coalesce")
{
  IntervalSet s;
  s.Add(10, 20);
  s.Add(30, 40);
  CHECK(s.Size() == 2);
  s.Add(21, 29);  // fills the hole exactly
  CHECK(s.Ranges() == std::vector<KeyRange>{{10, 40}});
  s.Add(5, 12);
  s.Add(38, 50);
  CHECK(s.Ranges() == std::vector<KeyRange>{{5, 50}});
  s.Add(52, 60);
  CHECK(s.Size() == 2);
}

TEST_CASE("coalescing of adjacent ranges can be disabled")
{
  IntervalSet s{false};
  s.Add(1, 5);
  s.Add(6, 9);
  CHECK(s.Size() == 2);
  s.Add(4, 7);  // overlap always merges
  CHECK(s.Ranges() == std::vector<KeyRange>{{1, 9}});
}

TEST_CASE("gaps list the uncovered parts of a query")
{
  IntervalSet s;
  s.Add(6, 13);
  s.Add(20, 25);
  CHECK(s.Gaps(1, 8) == std::vector<KeyRange>{{1, 5}});
  CHECK(s.Gaps(6, 13).empty());
  CHECK(s.Gaps(0, 30) == std::vector<KeyRange>{{0, 5}, {14, 19}, {26, 30}});
  CHECK(s.CoversAll(7, 12));
  CHECK_FALSE(s.CoversAll(7, 14));
  CHECK(s.Find(22) == KeyRange{20, 25});
  CHECK_FALSE(s.Find(14).has_value());
  CHECK_THROWS_AS(s.Add(3, 2), std::invalid_argument);
}

TEST_CASE("extreme keys do not overflow")
{
  IntervalSet s;
  s.Add(0, 0);
  s.Add(kKeyInfinity - 1, kKeyInfinity);
  CHECK(s.Covers(0));
  CHECK(s.Covers(kKeyInfinity));
  CHECK(s.Gaps(0, kKeyInfinity) == std::vector<KeyRange>{{1, kKeyInfinity - 2}});
}

TEST_CASE("random ranges agree with a per-key oracle")
{
  std::mt19937_64 rng{11};
  for (int round = 0; round < 50; ++round) {
    IntervalSet s{round % 2 == 0};
    std::set<Key> covered;
    for (int i = 0; i < 30; ++i) {
      const Key lo = rng() % 500;
      const Key hi = lo + rng() % 20;
      s.Add(lo, hi);
      for (Key k = lo; k <= hi; ++k) covered.insert(k);
    }
    for (Key k = 0; k < 530; ++k) REQUIRE(s.Covers(k) == covered.contains(k));
    // stored ranges are disjoint and ordered
    const auto ranges = s.Ranges();
    for (std::size_t i = 1; i < ranges.size(); ++i) REQUIRE(ranges[i - 1].hi < ranges[i].lo);
    const Key lo = rng() % 500;
    const Key hi = lo + rng() % 100;
    std::size_t uncovered = 0;
    for (const auto &g : s.Gaps(lo, hi)) {
      for (Key k = g.lo; k <= g.hi; ++k) REQUIRE_FALSE(covered.contains(k));
      uncovered += g.hi - g.lo + 1;
    }
    std::size_t expect = 0;
    for (Key k = lo; k <= hi; ++k) expect += covered.contains(k) ? 0 : 1;
    REQUIRE(uncovered == expect);
  }
}

TEST_CASE("csv export")
{
  IntervalSet s;
  s.Add(1, 6);
  s.Add(9, 9);
  CHECK(s.ToCsv() == "lo,hi\n1,6\n9,9\n");
}

TEST_CASE("deletion journal survives a crash")
{
  pcm::SimDevice dev;
  DeletionJournal j{dev};
  CHECK(j.Add(17));
  CHECK(j.Add(3));
  CHECK_FALSE(j.Add(17));
  CHECK(j.Size() == 2);
  j.Crash();
  CHECK(j.Size() == 0);
  j.Recover();
  CHECK(j.Keys() == std::set<Key>{3, 17});
  CHECK(j.ToCsv() == "key\n3\n17\n");
}
