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

#include <filesystem>
#include <set>
#include <sstream>

#include "pam/bench/config.hpp"
#include "pam/bench/harness.hpp"
#include "pam/bench/results.hpp"

using namespace pam;
using namespace pam::bench;

namespace
{
ExperimentConfig
Small(Method m)
{
  ExperimentConfig c;
  c.method = m;
  c.rows = 4000;
  c.partition_capacity = 512;
  c.pool_capacity = 64;
  c.buffer_threshold = 128;
  c.selectivity = 0.05;
  return c;
}

ResultRow
SampleRow()
{
  ResultRow r;
  r.kind = "convergence";
  r.label = "eam/bitmap";
  r.method = "eam";
  r.index = "ub";
  r.invalidation = "bitmap";
  r.pattern = "random";
  r.selectivity = 0.03;
  r.scale = 100;
  r.rows = 1000000;
  r.seed = 42;
  r.sim_time_ns = 123456789012;
  r.host_wall_ms = 12.5;
  r.reads = 7;
  r.line_flushes = 8;
  r.bits_modified = 9;
  r.invalidation_ns = 10;
  r.queries = 11;
  r.operations = 11;
  r.converged = true;
  return r;
}

}  // namespace

TEST_CASE("result rows survive a csv round trip")
{
  std::vector<ResultRow> rows{SampleRow(), SampleRow()};
  rows[1].kind = "dynamic";
  rows[1].workload = "B";
  rows[1].converged = false;
  rows[1].selectivity = 0.1 + 0.2;
  std::stringstream ss;
  WriteCsv(ss, rows);
  CHECK(ReadCsv(ss) == rows);
}

TEST_CASE("an empty result set is just the header")
{
  std::stringstream ss;
  WriteCsv(ss, {});
  CHECK(ss.str() == CsvHeader() + "\n");
  CHECK(ReadCsv(ss).empty());
  std::stringstream bad{CsvHeader() + "\nconvergence,too,few\n"};
  CHECK_THROWS_AS(ReadCsv(bad), std::invalid_argument);
}

TEST_CASE("config files expand to one run per section")
{
  std::stringstream in{
      "# shared settings\n"
      "rows = 5000\n"
      "selectivity_pct = 2\n"
      "[am]\n"
      "method = am\n"
      "invalidation = journal\n"
      "[pam]\n"
      "method = pam\n"
      "index = sb\n"
      "write_latency_ns = 500\n"};
  const auto runs = ParseConfig(in);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].rows == 5000);
  CHECK(runs[0].selectivity == doctest::Approx(0.02));
  CHECK(runs[0].Label() == "am/journal");
  CHECK(runs[1].Label() == "pam+sb");
  CHECK(runs[1].device.write_latency_ns == 500);
  CHECK(runs[1].Kind() == RunKind::kConvergence);

  std::stringstream typo{"[x]\nrowz = 3\n"};
  CHECK_THROWS_WITH_AS(ParseConfig(typo), "line 2: unknown setting: rowz", std::invalid_argument);
}

TEST_CASE("inconsistent settings are rejected")
{
  ExperimentConfig c;
  c.invalidation = Invalidation::kFlag;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);  // pam has no invalidation choice
  ExperimentConfig d;
  d.index = IndexKind::kPartitioned;
  CHECK_THROWS_AS(d.Validate(), std::invalid_argument);
  ExperimentConfig e;
  e.workload = "Z";
  CHECK_THROWS_AS(e.Validate(), std::invalid_argument);
  ExperimentConfig f;
  f.rows = 10;
  f.selectivity = 0.01;
  CHECK_THROWS_AS(f.Validate(), std::invalid_argument);
  ExperimentConfig g;
  g.workload = "balanced";
  CHECK(g.Kind() == RunKind::kIndex);
  g.workload = "A";
  CHECK(g.Kind() == RunKind::kDynamic);
  CHECK(Small(Method::kEam).EffectiveInvalidation() == Invalidation::kBitmap);
  CHECK(Small(Method::kAm).EffectiveInvalidation() == Invalidation::kFlag);
}

TEST_CASE("convergence runs finish and report device counters")
{
  for (Method m : {Method::kAm, Method::kEam, Method::kPam}) {
    for (PatternKind p : {PatternKind::kRandom, PatternKind::kSequential, PatternKind::kNewKeys}) {
      auto c = Small(m);
      c.pattern = p;
      const auto r = RunConvergence(c);
      CAPTURE(r.label);
      CAPTURE(r.pattern);
      CHECK(r.converged);
      CHECK(r.queries >= 20);
      CHECK(r.sim_time_ns > 0);
      CHECK(r.bits_modified > 0);
      if (p == PatternKind::kNewKeys) CHECK(r.queries == 20);
    }
  }
}

TEST_CASE("the query cap flags a run as not converged")
{
  auto c = Small(Method::kPam);
  c.max_queries = 3;
  const auto r = RunConvergence(c);
  CHECK(r.queries == 3);
  CHECK_FALSE(r.converged);
}

TEST_CASE("invalidation strategies become three plot series")
{
  std::vector<ExperimentConfig> configs;
  for (Invalidation inv : {Invalidation::kFlag, Invalidation::kBitmap, Invalidation::kJournal}) {
    auto c = Small(Method::kAm);
    c.invalidation = inv;
    configs.push_back(c);
  }
  const auto rows = RunAll(configs, 3);
  REQUIRE(rows.size() == 3);
  std::set<std::string> series;
  for (const auto &pt : GroupForPlots(rows)) {
    if (pt.figure == "invalidation") series.insert(pt.series);
  }
  CHECK(series == std::set<std::string>{"flag", "bitmap", "journal"});
  CHECK(rows[2].invalidation_ns == 0);
  CHECK(rows[1].invalidation_ns < rows[0].invalidation_ns);
  std::stringstream ss;
  WritePlotData(ss, rows);
  CHECK(ss.str().rfind("figure,series,x,metric,value\n", 0) == 0);
}

TEST_CASE("parallel runs match sequential ones")
{
  std::vector<ExperimentConfig> configs;
  for (Method m : {Method::kAm, Method::kEam, Method::kPam}) {
    auto c = Small(m);
    c.workload = "A";
    c.scale = 1;
    configs.push_back(c);
  }
  const auto parallel = RunAll(configs, 3);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto r = RunExperiment(configs[i]);
    CHECK(r.label == parallel[i].label);
    CHECK(r.sim_time_ns == parallel[i].sim_time_ns);
    CHECK(r.bits_modified == parallel[i].bits_modified);
    CHECK(r.operations == 2000);
  }
}

TEST_CASE("saved traces replay to the same result")
{
  const auto path = std::filesystem::temp_directory_path() / "pam_bench_trace_test.txt";
  auto c = Small(Method::kPam);
  c.workload = "A";
  c.scale = 1;
  c.trace_out = path.string();
  const auto generated = RunExperiment(c);
  auto replay = Small(Method::kPam);
  replay.trace_in = path.string();
  const auto replayed = RunExperiment(replay);
  CHECK(replayed.sim_time_ns == generated.sim_time_ns);
  CHECK(replayed.operations == generated.operations);
  std::filesystem::remove(path);
}

TEST_CASE("index workloads run on a bare index")
{
  auto c = Small(Method::kPam);
  c.workload = "balanced";
  c.scale = 1000;
  for (IndexKind k : {IndexKind::kBB, IndexKind::kSB, IndexKind::kUB}) {
    c.index = k;
    const auto r = RunExperiment(c);
    CHECK(r.kind == "index");
    CHECK(r.label == IndexKindName(k));
    CHECK(r.operations == 1000);
  }
}
