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
#include "pam/bench/results.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pam::bench
{
namespace
{
constexpr const char *kColumns[] = {
    "kind",         "label",      "method",        "index",    "invalidation",
    "pattern",      "workload",   "selectivity",   "scale",    "rows",
    "seed",         "sim_time_ns", "host_wall_ms", "reads",    "line_flushes",
    "bits_modified", "invalidation_ns", "queries", "operations", "converged",
};
constexpr std::size_t kColumnCount = std::size(kColumns);

/// Shortest text that parses back to the same double.
std::string
FormatDouble(double v)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double
ParseDouble(const std::string &s)
{
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("bad number in csv: " + s);
  return v;
}

std::uint64_t
ParseU64(const std::string &s)
{
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("bad integer in csv: " + s);
  return v;
}

void
CheckField(const std::string &s)
{
  if (s.find_first_of(",\n\"") != std::string::npos) throw std::invalid_argument("field needs no quoting: " + s);
}

std::vector<std::string>
Split(const std::string &line)
{
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss{line};
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string
CsvHeader()
{
  std::string h;
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i > 0) h += ',';
    h += kColumns[i];
  }
  return h;
}

void
WriteCsv(std::ostream &os, const std::vector<ResultRow> &rows)
{
  os << CsvHeader() << '\n';
  for (const auto &r : rows) {
    for (const auto *s : {&r.kind, &r.label, &r.method, &r.index, &r.invalidation, &r.pattern, &r.workload}) {
      CheckField(*s);
      os << *s << ',';
    }
    os << FormatDouble(r.selectivity) << ',' << r.scale << ',' << r.rows << ',' << r.seed << ',' << r.sim_time_ns
       << ',' << FormatDouble(r.host_wall_ms) << ',' << r.reads << ',' << r.line_flushes << ',' << r.bits_modified
       << ',' << r.invalidation_ns << ',' << r.queries << ',' << r.operations << ',' << (r.converged ? 1 : 0)
       << '\n';
  }
}

std::vector<ResultRow>
ReadCsv(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line) || line != CsvHeader()) throw std::invalid_argument("csv header mismatch");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = Split(line);
    if (f.size() != kColumnCount) throw std::invalid_argument("csv row has the wrong number of fields");
    ResultRow r;
    r.kind = f[0];
    r.label = f[1];
    r.method = f[2];
    r.index = f[3];
    r.invalidation = f[4];
    r.pattern = f[5];
    r.workload = f[6];
    r.selectivity = ParseDouble(f[7]);
    r.scale = ParseU64(f[8]);
    r.rows = ParseU64(f[9]);
    r.seed = ParseU64(f[10]);
    r.sim_time_ns = ParseU64(f[11]);
    r.host_wall_ms = ParseDouble(f[12]);
    r.reads = ParseU64(f[13]);
    r.line_flushes = ParseU64(f[14]);
    r.bits_modified = ParseU64(f[15]);
    r.invalidation_ns = ParseU64(f[16]);
    r.queries = ParseU64(f[17]);
    r.operations = ParseU64(f[18]);
    if (f[19] != "0" && f[19] != "1") throw std::invalid_argument("bad converged flag in csv: " + f[19]);
    r.converged = f[19] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<PlotPoint>
GroupForPlots(const std::vector<ResultRow> &rows)
{
  std::vector<PlotPoint> out;
  auto emit = [&](const std::string &figure, const std::string &series, double x, const ResultRow &r) {
    out.push_back({figure, series, x, "sim_time_ns", static_cast<double>(r.sim_time_ns)});
    out.push_back({figure, series, x, "bits_modified", static_cast<double>(r.bits_modified)});
  };
  for (const auto &r : rows) {
    if (r.kind == "convergence") {
      emit("convergence_" + r.pattern, r.label, r.selectivity, r);
      out.push_back({"convergence_" + r.pattern, r.label, r.selectivity, "queries", static_cast<double>(r.queries)});
      if (r.method == "am") {
        out.push_back({"invalidation", r.invalidation, r.selectivity, "invalidation_ns",
                       static_cast<double>(r.invalidation_ns)});
      }
    } else if (r.kind == "dynamic") {
      emit("workload_" + r.workload, r.label, r.selectivity, r);
    } else {
      emit("index_" + r.workload, r.label, static_cast<double>(r.scale), r);
    }
  }
  return out;
}

void
WritePlotData(std::ostream &os, const std::vector<ResultRow> &rows)
{
  os << "figure,series,x,metric,value\n";
  for (const auto &p : GroupForPlots(rows)) {
    os << p.figure << ',' << p.series << ',' << FormatDouble(p.x) << ',' << p.metric << ',' << FormatDouble(p.value)
       << '\n';
  }
}

}  // namespace pam::bench
