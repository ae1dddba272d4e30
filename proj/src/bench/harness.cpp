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
#include "pam/bench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pam/framework/pam.hpp"
#include "pam/index/bbtree.hpp"
#include "pam/merging/adaptive_merging.hpp"

namespace pam::bench
{
namespace
{
using Clock = std::chrono::steady_clock;

ResultRow
StartRow(const ExperimentConfig &config, std::string_view kind)
{
  ResultRow r;
  r.kind = std::string{kind};
  r.label = config.Label();
  r.method = kind == "index" ? "" : std::string{MethodName(config.method)};
  r.index = config.method == Method::kPam || kind == "index" ? std::string{IndexKindName(config.index)}
                                                             : (config.method == Method::kAm ? "pbt" : "ub");
  r.invalidation = config.method == Method::kPam || kind == "index"
                       ? ""
                       : std::string{InvalidationName(config.EffectiveInvalidation())};
  r.pattern = kind == "convergence" ? std::string{PatternName(config.pattern)} : "";
  r.workload = config.workload;
  r.selectivity = config.selectivity;
  r.scale = config.scale;
  r.rows = config.rows;
  r.seed = config.seed;
  return r;
}

void
FinishRow(ResultRow &r, const pcm::SimDevice &device, Clock::time_point started)
{
  const auto s = device.Stats();
  r.sim_time_ns = s.sim_time_ns;
  r.reads = s.reads;
  r.line_flushes = s.line_flushes;
  r.bits_modified = s.bits_modified;
  r.host_wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
}

std::uint64_t
InvalidationNs(const AdaptiveMethod &m)
{
  if (const auto *am = dynamic_cast<const AdaptiveMerging *>(&m)) return am->InvalidationTime();
  return 0;
}

std::vector<Op>
LoadTrace(const ExperimentConfig &config)
{
  std::vector<Op> ops;
  if (!config.trace_in.empty()) {
    std::ifstream in{config.trace_in};
    if (!in) throw std::runtime_error("cannot open trace: " + config.trace_in);
    ops = ReadTrace(in);
  } else {
    auto spec = LookupWorkload(config.workload).Scaled(config.scale);
    spec.selectivity = config.selectivity;
    ops = MakeWorkload(spec, config.rows, config.seed);
  }
  if (!config.trace_out.empty()) {
    std::ofstream out{config.trace_out};
    if (!out) throw std::runtime_error("cannot write trace: " + config.trace_out);
    WriteTrace(out, ops);
  }
  return ops;
}

}  // namespace

std::unique_ptr<AdaptiveMethod>
MakeMethod(const ExperimentConfig &config, pcm::SimDevice &device)
{
  BBTreeConfig tree{};
  tree.buffer_threshold = config.buffer_threshold;
  if (config.method == Method::kPam) {
    PamConfig c{};
    c.index = config.index;
    c.tree = tree;
    c.partition_capacity = config.partition_capacity;
    return std::make_unique<Pam>(device, c);
  }
  AmConfig c = config.method == Method::kAm ? MakeAmConfig() : MakeEamConfig();
  c.invalidation = config.EffectiveInvalidation();
  c.pool_capacity = config.pool_capacity;
  c.partition_capacity = config.partition_capacity;
  c.tree = tree;
  return std::make_unique<AdaptiveMerging>(device, c, std::string{MethodName(config.method)});
}

pcm::DeviceConfig
SizedDevice(const ExperimentConfig &config)
{
  pcm::DeviceConfig d = config.device;
  // partitions, index leaves at fill factor and slack for inserted keys
  std::uint64_t entries = config.rows;
  if (!config.workload.empty()) {
    const auto spec = LookupWorkload(config.workload).Scaled(config.scale);
    entries += spec.batches * spec.inserts;
  }
  const std::uint64_t need = entries * 96 + (std::uint64_t{64} << 20);
  const std::uint64_t line = d.line_size;
  if (d.capacity < need) d.capacity = (need + line - 1) / line * line;
  return d;
}

ResultRow
RunConvergence(const ExperimentConfig &config)
{
  config.Validate();
  const auto started = Clock::now();
  pcm::SimDevice device{SizedDevice(config)};
  auto method = MakeMethod(config, device);
  method->Initialize(MakeDataset(config.rows, config.seed));
  device.ResetStats();

  QueryGenerator gen{PatternSpec{config.pattern, config.selectivity, config.rows, config.seed}};
  const std::uint64_t cap = config.max_queries != 0 ? config.max_queries : 10 * gen.MinQueriesToCover();
  ResultRow r = StartRow(config, "convergence");
  while (!method->Converged() && r.queries < cap) {
    const auto q = gen.Next();
    if (!q) break;
    method->Search(q->lo, q->hi);
    ++r.queries;
  }
  method->Sync();
  r.converged = method->Converged();
  r.operations = r.queries;
  r.invalidation_ns = InvalidationNs(*method);
  FinishRow(r, device, started);
  return r;
}

ResultRow
RunDynamic(const ExperimentConfig &config)
{
  config.Validate();
  const auto started = Clock::now();
  const auto ops = LoadTrace(config);
  pcm::SimDevice device{SizedDevice(config)};
  auto method = MakeMethod(config, device);
  method->Initialize(MakeDataset(config.rows, config.seed));
  device.ResetStats();

  ResultRow r = StartRow(config, "dynamic");
  for (const auto &op : ops) {
    switch (op.type) {
      case OpType::kInsert:
        method->Insert(Entry{op.key, op.rid, false});
        break;
      case OpType::kDelete:
        method->Delete(op.key);
        break;
      case OpType::kRangeQuery:
        method->Search(op.key, op.hi);
        ++r.queries;
        break;
      case OpType::kPointQuery:
        method->Lookup(op.key);
        ++r.queries;
        break;
    }
  }
  method->Sync();
  r.operations = ops.size();
  r.converged = method->Converged();
  r.invalidation_ns = InvalidationNs(*method);
  FinishRow(r, device, started);
  return r;
}

ResultRow
RunIndexWorkload(const ExperimentConfig &config)
{
  config.Validate();
  const auto started = Clock::now();
  const auto ops = LoadTrace(config);
  pcm::SimDevice device{SizedDevice(config)};
  BBTreeConfig tree{};
  tree.buffer_threshold = config.buffer_threshold;
  auto index = MakeMergeIndex(config.index, device, tree);

  std::vector<Entry> data(config.rows);
  for (std::uint64_t k = 0; k < config.rows; ++k) data[k] = Entry{k, k, false};
  index->BulkInsert(data);
  index->Sync();
  device.ResetStats();

  ResultRow r = StartRow(config, "index");
  for (const auto &op : ops) {
    switch (op.type) {
      case OpType::kInsert:
        index->Insert(Entry{op.key, op.rid, false});
        break;
      case OpType::kDelete:
        index->Delete(op.key);
        break;
      case OpType::kRangeQuery:
        index->RangeSearch(op.key, op.hi);
        ++r.queries;
        break;
      case OpType::kPointQuery:
        index->PointSearch(op.key);
        ++r.queries;
        break;
    }
  }
  index->Sync();
  r.operations = ops.size();
  r.converged = true;
  FinishRow(r, device, started);
  return r;
}

ResultRow
RunExperiment(const ExperimentConfig &config)
{
  switch (config.Kind()) {
    case RunKind::kConvergence:
      return RunConvergence(config);
    case RunKind::kDynamic:
      return RunDynamic(config);
    case RunKind::kIndex:
      return RunIndexWorkload(config);
  }
  throw std::logic_error("unreachable run kind");
}

std::vector<ResultRow>
RunAll(const std::vector<ExperimentConfig> &configs, unsigned jobs)
{
  std::vector<ResultRow> rows(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        rows[i] = RunExperiment(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto &t : threads) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace pam::bench
