/* Copyright 2026 The pbrehash Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pbr/workload.hpp"

using namespace pbr;
using namespace pbr::bench;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string temp_path(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pbr_" + name + "_" + std::to_string(::getpid()) + ".csv");
  std::filesystem::remove(p);
  return p.string();
}

}  // namespace

TEST(Workload, FivePercentRepeatsEachValueTwentyTimesOnAverage) {
  workload_spec spec;
  spec.unique_keys = 100;
  spec.unique_pct = 5;
  const auto keys = generate_workload(spec);
  EXPECT_EQ(keys.size(), 2000u);
  std::unordered_map<std::uint64_t, int> counts;
  for (auto k : keys) ++counts[k];
  EXPECT_EQ(counts.size(), 100u);
  for (const auto& [k, n] : counts) EXPECT_GE(n, 1);
  EXPECT_DOUBLE_EQ(static_cast<double>(keys.size()) / counts.size(), 20.0);
}

TEST(Workload, FullyUniqueInput) {
  workload_spec spec;
  spec.unique_keys = 5000;
  spec.unique_pct = 100;
  const auto keys = generate_workload(spec);
  EXPECT_EQ(keys.size(), 5000u);
  EXPECT_EQ(std::unordered_set<std::uint64_t>(keys.begin(), keys.end()).size(), 5000u);
}

TEST(Workload, LengthRoundsAndUniqueCountStaysFixed) {
  workload_spec spec;
  spec.unique_keys = 1000;
  for (unsigned pct : {3u, 7u, 30u}) {
    spec.unique_pct = pct;
    const auto keys = generate_workload(spec);
    EXPECT_EQ(keys.size(), (1000u * 100 + pct / 2) / pct);
    EXPECT_EQ(std::unordered_set<std::uint64_t>(keys.begin(), keys.end()).size(), 1000u);
  }
}

TEST(Workload, DeterministicPerSeed) {
  workload_spec spec;
  spec.unique_keys = 1000;
  spec.unique_pct = 10;
  EXPECT_EQ(generate_workload(spec), generate_workload(spec));
  auto other = spec;
  other.seed = 2;
  EXPECT_NE(generate_workload(spec), generate_workload(other));
}

TEST(Workload, ShuffleSpreadsRepeats) {
  workload_spec spec;
  spec.unique_keys = 1000;
  spec.unique_pct = 10;
  const auto keys = generate_workload(spec);
  // The guaranteed first occurrences must not stay clustered at the front.
  std::unordered_set<std::uint64_t> front(keys.begin(), keys.begin() + 1000);
  EXPECT_LT(front.size(), 900u);
}

TEST(Workload, RejectsDegenerateSpecs) {
  workload_spec spec;
  spec.unique_pct = 0;
  EXPECT_THROW(generate_workload(spec), std::invalid_argument);
  spec.unique_pct = 101;
  EXPECT_THROW(generate_workload(spec), std::invalid_argument);
  spec.unique_pct = 50;
  spec.unique_keys = 0;
  EXPECT_THROW(generate_workload(spec), std::invalid_argument);
}

TEST(Workload, GeneratorBoundsAndDeterminism) {
  xorshift64star a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
  xorshift64star r(1);
  for (int i = 0; i < 10000; ++i) ASSERT_LT(r.below(7), 7u);
  xorshift64star zero(0);
  EXPECT_NE(zero(), 0u);
}

TEST(Bench, SingleThreadFill) {
  workload_spec spec;
  spec.unique_keys = 20000;
  spec.unique_pct = 20;
  const auto keys = generate_workload(spec);
  bench_map map(512);
  const auto r = run_fill(map, keys, 1);
  EXPECT_EQ(r.restarts, 0u);
  EXPECT_EQ(r.unique_keys, 20000u);
  EXPECT_EQ(r.succeeded, 20000u);
  EXPECT_EQ(r.total_ops, keys.size());
  EXPECT_GT(r.seconds, 0.0);
  EXPECT_DOUBLE_EQ(r.throughput, r.total_ops / r.seconds);
  EXPECT_EQ(r.growths, map.levels_grown());
}

TEST(Bench, MultiThreadFillWithDuplicates) {
  workload_spec spec;
  spec.unique_keys = 30000;
  spec.unique_pct = 5;
  const auto keys = generate_workload(spec);
  bench_map map(512);
  const auto r = run_fill(map, keys, 4);
  EXPECT_EQ(map.size(), 30000u);
  EXPECT_EQ(r.succeeded, 30000u);
}

TEST(Bench, LookupAfterFillHitsEverything) {
  workload_spec spec;
  spec.unique_keys = 30000;
  spec.unique_pct = 30;
  const auto keys = generate_workload(spec);
  bench_map map(512);
  run_fill(map, keys, 2);
  const auto r = run_lookup(map, keys, 2);
  EXPECT_EQ(r.succeeded, r.total_ops);
  EXPECT_EQ(r.growths, 0u);

  map.force_rehash_all();
  const auto again = run_lookup(map, keys, 2);
  EXPECT_EQ(again.succeeded, r.succeeded);
}

TEST(Bench, LookupOfDisjointKeysMissesWithoutRestarts) {
  workload_spec spec;
  spec.unique_keys = 10000;
  const auto keys = generate_workload(spec);
  auto other = spec;
  other.seed = 99;
  const auto strangers = generate_workload(other);
  bench_map map(512);
  run_fill(map, keys, 1);
  const auto r = run_lookup(map, strangers, 4);
  EXPECT_EQ(r.succeeded, 0u);
  EXPECT_EQ(r.restarts, 0u);
}

TEST(Bench, ContentsIndependentOfThreadCount) {
  workload_spec spec;
  spec.unique_keys = 40000;
  spec.unique_pct = 10;
  const auto keys = generate_workload(spec);
  bench_map one(512), four(512);
  run_fill(one, keys, 1);
  run_fill(four, keys, 4);
  EXPECT_EQ(one.size(), four.size());
  for (auto k : keys) ASSERT_TRUE(four.contains(k));
  if (one.bucket_count() == four.bucket_count()) {
    one.force_rehash_all();
    four.force_rehash_all();
    EXPECT_EQ(census(one), census(four));
  }
}

TEST(Bench, SingleThreadCensusIsReproducible) {
  workload_spec spec;
  spec.unique_keys = 20000;
  spec.unique_pct = 30;
  const auto keys = generate_workload(spec);
  bench_map a(512), b(512);
  run_fill(a, keys, 1);
  run_fill(b, keys, 1);
  EXPECT_EQ(census(a), census(b));
}

TEST(Report, OneFillReportIsHeaderPlusRow) {
  const std::string path = temp_path("one");
  bench_report r;
  r.threads = 2;
  r.unique_pct = 5;
  r.unique_keys = 10;
  r.total_ops = 200;
  r.seconds = 0.5;
  r.throughput = 400;
  emit_report(std::span(&r, 1), path);
  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], csv_header);
  EXPECT_EQ(lines[1], "fill,2,5,10,200,0.5,400,0,0,,,,");
  std::filesystem::remove(path);
}

TEST(Report, AppendsWithoutRepeatingHeaderAndFillsCensus) {
  const std::string path = temp_path("append");
  bench_report fill;
  bench_report lookup;
  lookup.stage = phase::lookup;
  lookup.census = census_report{8, 7, 3, 1, 5, 9};
  std::vector<bench_report> rows{fill, lookup};
  emit_report(rows, path);
  emit_report(std::span(&fill, 1), path);
  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(std::count(lines.begin(), lines.end(), std::string(csv_header)), 1);
  EXPECT_TRUE(lines[2].starts_with("lookup,"));
  EXPECT_TRUE(lines[2].ends_with(",7,3,1,5")) << lines[2];
  std::filesystem::remove(path);
}

TEST(Report, UnwritablePathThrows) {
  bench_report r;
  EXPECT_THROW(emit_report(std::span(&r, 1), "/nonexistent-dir/x/report.csv"), std::runtime_error);
}
