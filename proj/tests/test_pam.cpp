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
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "pam/framework/pam.hpp"

using namespace pam;

namespace
{
constexpr Key
L(char c)
{
  return static_cast<Key>(c - 'a' + 1);
}

std::vector<Entry>
LetterDataset()
{
  const std::string letters = "bszeiackquxnpldfrtmz";
  std::vector<Entry> out;
  for (std::size_t i = 0; i < letters.size(); ++i) out.push_back(Entry{L(letters[i]), i + 1, false});
  return out;
}

std::string
Letters(const std::vector<Entry> &entries)
{
  std::string s;
  for (const auto &e : entries) s.push_back(static_cast<char>('a' + e.key - 1));
  return s;
}

PamConfig
LetterConfig(IndexKind kind = IndexKind::kBB)
{
  PamConfig c;
  c.index = kind;
  c.partition_capacity = 5;
  c.tree.tree.leaf_fanout = 4;
  c.tree.tree.sorted_slots = 3;
  c.tree.tree.section_align = 1;
  c.tree.tree.inner_fanout = 4;
  c.tree.buffer_threshold = 7;
  return c;
}

/// Lines read while running fn.
std::uint64_t
ReadsOf(pcm::SimDevice &dev, auto &&fn)
{
  const auto before = dev.Stats().reads;
  fn();
  return dev.Stats().reads - before;
}

}  // namespace

TEST_CASE("letter walkthrough: two searches and a delete")
{
  pcm::SimDevice dev;
  Pam pam{dev, LetterConfig()};
  pam.Initialize(LetterDataset());
  REQUIRE(pam.PartitionCount() == 4);
  const auto &parts = pam.Store().Partitions();
  CHECK(parts.at(0).min == L('b'));
  CHECK(parts.at(0).max == L('z'));
  CHECK(parts.at(3).min == L('f'));
  CHECK(parts.at(3).max == L('z'));

  CHECK(Letters(pam.Search(L('f'), L('m'))) == "fiklm");
  CHECK(pam.InsertionJournal().Ranges() == std::vector<KeyRange>{{L('f'), L('m')}});
  CHECK(parts.at(3).live == 3);
  CHECK(parts.at(3).min == L('r'));

  const auto p4_live = parts.at(3).live;
  const auto overlapping = pam.Store().Overlapping(L('a'), L('e'));
  CHECK(std::find(overlapping.begin(), overlapping.end(), 3U) == overlapping.end());
  CHECK(Letters(pam.Search(L('a'), L('h'))) == "abcdef");
  CHECK(parts.at(3).live == p4_live);
  CHECK(parts.at(3).min == L('r'));
  CHECK(pam.InsertionJournal().Ranges() == std::vector<KeyRange>{{L('a'), L('m')}});
  CHECK(Letters(pam.Index().RangeSearch(0, 30)) == "abcdefiklm");

  pam.Delete(L('r'));
  pam.Delete(L('t'));
  CHECK(pam.Deletions().Keys() == std::set<Key>{L('r'), L('t')});
  CHECK(parts.at(3).live == 1);
  CHECK(parts.at(3).min == L('z'));
  CHECK(parts.at(3).max == L('z'));
  CHECK(Letters(pam.Search(L('q'), L('u'))) == "qsu");
}

TEST_CASE("deleting an absent key changes nothing")
{
  pcm::SimDevice dev;
  Pam pam{dev, LetterConfig()};
  pam.Initialize(LetterDataset());
  pam.Delete(L('g'));
  CHECK(pam.Deletions().Size() == 0);
  CHECK(pam.InsertionJournal().Empty());
}

TEST_CASE("searches already covered by the journal read no partition lines")
{
  pcm::SimDevice dev;
  Pam pam{dev, LetterConfig()};
  pam.Initialize(LetterDataset());
  pam.Search(L('f'), L('m'));
  const auto with_pam = ReadsOf(dev, [&] { CHECK(Letters(pam.Search(L('g'), L('l'))) == "ikl"); });
  const auto index_only = ReadsOf(dev, [&] { (void)pam.Index().RangeSearch(L('g'), L('l')); });
  CHECK(with_pam == index_only);
}

TEST_CASE("all partitions are freed once the domain is covered")
{
  pcm::SimDevice dev;
  Pam pam{dev, LetterConfig()};
  pam.Initialize(LetterDataset());
  pam.Search(L('f'), L('m'));
  pam.Search(L('a'), L('h'));
  CHECK(pam.PartitionCount() == 4);
  pam.Search(L('n'), L('s'));
  CHECK_FALSE(pam.Converged());
  CHECK(pam.Store().Find(3) != nullptr);
  pam.Search(L('t'), L('z'));
  CHECK(pam.Converged());
  CHECK(pam.Index().RangeSearch(0, 30).size() == 20);
}

TEST_CASE("recovery rebuilds the journal from index-resident runs")
{
  pcm::SimDevice dev;
  Pam pam{dev, LetterConfig()};
  pam.Initialize(LetterDataset());
  pam.Search(L('f'), L('m'));
  pam.Search(L('a'), L('h'));
  const auto parts_before = pam.Store().Partitions();
  pam.Crash();
  pam.Recover();
  CHECK(pam.InsertionJournal().Ranges() ==
        std::vector<KeyRange>{{L('a'), L('f')}, {L('i'), L('i')}, {L('k'), L('m')}});
  REQUIRE(pam.Store().Partitions().size() == parts_before.size());
  for (const auto &[id, p] : parts_before) {
    const auto &q = pam.Store().Partitions().at(id);
    CHECK(q.live == p.live);
    CHECK(q.min == p.min);
    CHECK(q.max == p.max);
  }
  CHECK(Letters(pam.Search(L('a'), L('z'))) == "abcdefiklmnpqrstuxzz");
}

TEST_CASE("recovery of a freshly initialized system")
{
  pcm::SimDevice dev;
  Pam pam{dev, LetterConfig()};
  pam.Initialize(LetterDataset());
  const auto before = pam.Store().Partitions();
  pam.Crash();
  pam.Recover();
  CHECK(pam.InsertionJournal().Empty());
  CHECK(pam.Store().Partitions().size() == before.size());
  for (const auto &[id, p] : before) CHECK(pam.Store().Partitions().at(id).min == p.min);
}

TEST_CASE("initialization edge cases")
{
  pcm::SimDevice dev;
  Pam empty{dev, LetterConfig()};
  empty.Initialize({});
  CHECK(empty.PartitionCount() == 0);
  CHECK(empty.Converged());
  CHECK(empty.Search(0, 100).empty());

  Pam one{dev, LetterConfig()};
  one.Initialize(std::vector<Entry>{{9, 1, false}, {4, 2, false}, {7, 3, false}});
  REQUIRE(one.PartitionCount() == 1);
  CHECK(one.Store().Partitions().at(0).min == 4);
  CHECK(one.Store().Partitions().at(0).max == 9);
  CHECK_THROWS_AS(one.Search(5, 4), std::invalid_argument);
  CHECK_THROWS_AS(Pam(dev, PamConfig{.index = IndexKind::kPartitioned}), std::invalid_argument);
}

TEST_CASE("inserts, updates and duplicates")
{
  pcm::SimDevice dev;
  Pam pam{dev, LetterConfig()};
  pam.Initialize(LetterDataset());
  pam.Insert(Entry{L('q'), 100, false});  // q also sits in an unmerged partition
  const auto q = pam.Search(L('q'), L('q'));
  CHECK(q.size() == 2);
  const auto p2_min = pam.Store().Partitions().at(1).min;
  pam.Insert(Entry{L('g'), 101, false});
  CHECK(pam.Store().Partitions().at(1).min == p2_min);
  CHECK(pam.Lookup(L('g')).size() == 1);

  pam.Update(L('u'), 500);  // unmerged partition key
  const auto u = pam.Search(L('u'), L('u'));
  REQUIRE(u.size() == 1);
  CHECK(u[0].rid == 500);
  pam.Update(L('q'), 600);  // merged key
  CHECK(pam.Search(L('q'), L('q')) == std::vector<Entry>{{L('q'), 600, false}});
  pam.Update(L('j'), 700);  // absent key
  CHECK(pam.Lookup(L('j')).size() == 1);
}

TEST_CASE("random traces match the multiset oracle and leave partitions unwritten")
{
  for (IndexKind kind : {IndexKind::kBB, IndexKind::kSB, IndexKind::kUB}) {
    CAPTURE(IndexKindName(kind));
    pcm::SimDevice dev;
    PamConfig cfg;
    cfg.index = kind;
    cfg.partition_capacity = 64;
    cfg.tree.buffer_threshold = 32;
    Pam pam{dev, cfg};
    std::mt19937_64 rng{static_cast<std::uint64_t>(kind) + 1};
    std::vector<Entry> data;
    testing::ShadowIndex shadow;
    for (Key k = 0; k < 2000; ++k) {
      if (rng() % 3 == 0) continue;
      data.push_back(Entry{k, k, false});
      shadow.Insert(k, k);
    }
    std::shuffle(data.begin(), data.end(), rng);
    pam.Initialize(data);

    // wear of every partition line right after initialization
    std::map<std::uint32_t, std::vector<std::uint64_t>> wear;
    for (const auto &[id, p] : pam.Store().Partitions()) {
      for (std::size_t off = 0; off < p.region.length; off += 64)
        wear[id].push_back(dev.LineWearWrites((p.region.base + off) / 64));
    }

    Rid rid = 10000;
    for (int i = 0; i < 3000; ++i) {
      const auto dice = rng() % 20;
      const Key k = rng() % 2100;
      if (dice < 8) {
        const Key hi = k + rng() % 40;
        REQUIRE(pam.Search(k, hi) == shadow.Range(k, hi));
      } else if (dice < 12) {
        pam.Insert(Entry{k, rid, false});
        shadow.Insert(k, rid++);
      } else if (dice < 16) {
        pam.Delete(k);
        shadow.Delete(k);
      } else if (dice < 18) {
        pam.Update(k, rid);
        shadow.Delete(k);
        shadow.Insert(k, rid++);
      } else {
        REQUIRE(pam.Lookup(k) == shadow.Range(k, k));
      }
    }
    pam.Sync();
    CHECK(pam.Search(0, 3000) == shadow.Range(0, 3000));
    for (const auto &[id, p] : pam.Store().Partitions()) {
      std::size_t line = 0;
      for (std::size_t off = 0; off < p.region.length; off += 64, ++line)
        CHECK(dev.LineWearWrites((p.region.base + off) / 64) == wear[id][line]);
    }
  }
}

TEST_CASE("a crash at any point does not change later results")
{
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    CAPTURE(seed);
    auto run = [&](std::optional<int> crash_at) {
      pcm::SimDevice dev;
      PamConfig cfg;
      cfg.partition_capacity = 50;
      cfg.tree.buffer_threshold = 16;
      Pam pam{dev, cfg};
      std::mt19937_64 rng{seed};
      std::vector<Entry> data;
      for (Key k = 0; k < 600; ++k) data.push_back(Entry{k * 2, k, false});
      std::shuffle(data.begin(), data.end(), rng);
      pam.Initialize(data);
      std::vector<std::vector<Entry>> answers;
      for (int i = 0; i < 400; ++i) {
        if (crash_at && *crash_at == i) {
          pam.Crash();
          pam.Recover();
        }
        const auto dice = rng() % 10;
        const Key k = rng() % 1250;
        if (dice < 5) {
          answers.push_back(pam.Search(k, k + rng() % 60));
        } else if (dice < 7) {
          pam.Insert(Entry{k, 5000 + static_cast<Rid>(i), false});
        } else {
          pam.Delete(k);
        }
      }
      answers.push_back(pam.Search(0, 1300));
      return answers;
    };
    const auto baseline = run(std::nullopt);
    std::mt19937_64 pick{seed * 31};
    const int crash_at = static_cast<int>(pick() % 400);
    CAPTURE(crash_at);
    CHECK(run(crash_at) == baseline);
  }
}

TEST_CASE("journal csv dumps")
{
  pcm::SimDevice dev;
  Pam pam{dev, LetterConfig()};
  pam.Initialize(LetterDataset());
  pam.Search(L('f'), L('m'));
  pam.Delete(L('r'));
  CHECK(pam.InsertionJournal().ToCsv() == "lo,hi\n6,13\n");
  CHECK(pam.Deletions().ToCsv() == "key\n18\n");
}

TEST_CASE("configuration keys")
{
  PamConfig c;
  CHECK(c.Set("partition_capacity", "128"));
  CHECK(c.partition_capacity == 128);
  CHECK(c.Set("journal_coalesce", "false"));
  CHECK_FALSE(c.journal_coalesce);
  CHECK_FALSE(c.Set("nope", "1"));
}
