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

// bench: set-building throughput benchmark, bucket census and stress runner.
//
//   bench fill|lookup|both|census [--threads 1,2,4] [--unique-pct 5,100]
//         [--unique-keys N | --full-scale] [--seed S] [--initial-buckets B]
//         [--census] [--force-rehash] [--out FILE.csv]
//   bench stress [--threads 8] [--ops 100000] [--seed S] [--seeds K]
//
// Exit status: 0 on success, 1 on a correctness failure (missed key, size
// mismatch, stress invariant), 2 on usage or I/O errors.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pbr/concurrent_map.hpp"
#include "pbr/instrumentation.hpp"
#include "pbr/testing/harness.hpp"
#include "pbr/workload.hpp"

namespace {

using pbr::bench::bench_map;
using pbr::bench::bench_report;
using pbr::bench::phase;

struct bench_options {
  std::vector<unsigned> threads{1};
  std::vector<unsigned> unique_pcts{5, 10, 20, 30, 100};
  std::uint64_t unique_keys = std::uint64_t{1} << 17;
  bool full_scale = false;
  std::uint64_t seed = 1;
  std::size_t initial_buckets = 512;
  bool census = false;
  bool force_rehash = false;
  std::size_t overpopulation_threshold = pbr::default_overpopulation_threshold;
  std::string out;
};

struct stress_options {
  unsigned threads = 8;
  std::uint64_t ops = 100000;
  std::uint64_t seed = 1;
  unsigned seeds = 1;
  std::uint64_t key_range = std::uint64_t{1} << 16;
  std::size_t initial_buckets = 2;
  unsigned timeout = 60;
};

void add_bench_options(CLI::App& cmd, bench_options& o) {
  cmd.add_option("--threads", o.threads, "Worker thread counts, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  cmd.add_option("--unique-pct", o.unique_pcts, "Percentages of unique keys in the input, 1..100")
      ->delimiter(',')
      ->check(CLI::Range(1u, 100u));
  cmd.add_option("--unique-keys", o.unique_keys, "Distinct keys per run")->check(CLI::PositiveNumber);
  cmd.add_flag("--full-scale", o.full_scale, "Use 2^21 distinct keys");
  cmd.add_option("--seed", o.seed, "Workload generator seed");
  cmd.add_option("--initial-buckets", o.initial_buckets, "Initial bucket count (power of two >= 2)");
  cmd.add_flag("--census", o.census, "Fill the census columns");
  cmd.add_flag("--force-rehash", o.force_rehash, "Rehash every bucket after the fill phase");
  cmd.add_option("--overpopulated-threshold", o.overpopulation_threshold,
                 "Chains longer than this count as overpopulated");
  cmd.add_option("--out", o.out, "Append CSV rows to this file (default: stdout)");
}

enum class mode { fill, lookup, both, census };

// Returns the process exit status.
int run_bench(mode m, bench_options o) {
  if (o.full_scale)
    o.unique_keys = std::uint64_t{1} << 21;
  if (m == mode::census)
    o.census = true;
  std::vector<bench_report> rows;
  bool correct = true;

  for (unsigned pct : o.unique_pcts) {
    pbr::bench::workload_spec spec;
    spec.unique_keys = o.unique_keys;
    spec.unique_pct = pct;
    spec.seed = o.seed;
    spec.initial_buckets = o.initial_buckets;
    const std::vector<std::uint64_t> keys = pbr::bench::generate_workload(spec);

    for (unsigned threads : o.threads) {
      bench_map map(o.initial_buckets);
      bench_report fill = pbr::bench::run_fill(map, keys, threads);
      fill.unique_pct = pct;
      if (fill.unique_keys != spec.unique_keys || fill.succeeded != spec.unique_keys) {
        std::cerr << "fill: size " << fill.unique_keys << ", successful inserts " << fill.succeeded
                  << ", expected " << spec.unique_keys << " (pct=" << pct << ", threads=" << threads
                  << ")\n";
        correct = false;
      }
      if (o.force_rehash)
        map.force_rehash_all();
      if (o.census)
        fill.census = pbr::census(map, o.overpopulation_threshold);
      if (m != mode::lookup)
        rows.push_back(fill);

      if (m == mode::lookup || m == mode::both) {
        bench_report lookup = pbr::bench::run_lookup(map, keys, threads);
        lookup.unique_pct = pct;
        if (lookup.succeeded != lookup.total_ops) {
          std::cerr << "lookup: " << lookup.total_ops - lookup.succeeded << " of " << lookup.total_ops
                    << " keys missed (pct=" << pct << ", threads=" << threads << ")\n";
          correct = false;
        }
        if (lookup.growths != 0) {
          std::cerr << "lookup: table grew during the lookup phase\n";
          correct = false;
        }
        if (o.census)
          lookup.census = pbr::census(map, o.overpopulation_threshold);
        rows.push_back(lookup);
      }
    }
  }

  if (m == mode::census) {
    std::cout << "Unique,%  Threads   Rehashed      Empty  Overpopulated  MaxChain  Growths\n";
    for (const auto& r : rows)
      std::cout << std::setw(8) << r.unique_pct << std::setw(9) << r.threads << std::setw(11)
                << r.census->rehashed << std::setw(11) << r.census->empty << std::setw(15)
                << r.census->overpopulated << std::setw(10) << r.census->max_chain << std::setw(9)
                << r.growths << '\n';
  }

  try {
    if (!o.out.empty())
      pbr::bench::emit_report(rows, o.out);
    else if (m != mode::census)
      pbr::bench::write_csv(std::cout, rows);
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 2;
  }
  return correct ? 0 : 1;
}

int run_stress(const stress_options& o) {
  bool all_passed = true;
  for (unsigned i = 0; i < o.seeds; ++i) {
    pbr::testing::stress_config cfg;
    cfg.threads = o.threads;
    cfg.ops_per_thread = o.ops;
    cfg.seed = o.seed + i;
    cfg.key_range = o.key_range;
    cfg.initial_buckets = o.initial_buckets;
    pbr::testing::stress_result r;
    {
      pbr::testing::watchdog guard(std::chrono::seconds(o.timeout), "stress seed " + std::to_string(cfg.seed));
      r = pbr::testing::run_concurrent_stress(cfg);
    }
    std::cout << "seed " << cfg.seed << ": " << (r.passed ? "PASS" : "FAIL") << "  ops=" << r.total_ops
              << " size=" << r.final_size << " restarts=" << r.stats.restarts
              << " rehashes=" << r.stats.rehashes << " growths=" << r.stats.growths
              << " seconds=" << r.seconds << '\n';
    for (const auto& f : r.failures) std::cout << "  " << f << '\n';
    all_passed = all_passed && r.passed;
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concurrent per-bucket rehashing hash map: benchmark, census and stress"};
  app.require_subcommand(1);

  bench_options fill_opts, lookup_opts, both_opts, census_opts;
  auto* fill = app.add_subcommand("fill", "Time concurrent insertion of the input array");
  add_bench_options(*fill, fill_opts);
  auto* lookup = app.add_subcommand("lookup", "Fill, then time concurrent lookup of the same array");
  add_bench_options(*lookup, lookup_opts);
  auto* both = app.add_subcommand("both", "Report fill and lookup phases");
  add_bench_options(*both, both_opts);
  auto* census = app.add_subcommand("census", "Fill, then print the bucket census per input rate");
  add_bench_options(*census, census_opts);

  stress_options stress_opts;
  auto* stress = app.add_subcommand("stress", "Concurrent mixed-operation stress with invariant checks");
  stress->add_option("--threads", stress_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  stress->add_option("--ops", stress_opts.ops, "Operations per thread");
  stress->add_option("--seed", stress_opts.seed, "First seed");
  stress->add_option("--seeds", stress_opts.seeds, "Number of consecutive seeds to run");
  stress->add_option("--key-range", stress_opts.key_range, "Keys are drawn from [0, N)")
      ->check(CLI::PositiveNumber);
  stress->add_option("--initial-buckets", stress_opts.initial_buckets, "Initial bucket count");
  stress->add_option("--timeout", stress_opts.timeout, "Watchdog seconds per seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fill)
      return run_bench(mode::fill, fill_opts);
    if (*lookup)
      return run_bench(mode::lookup, lookup_opts);
    if (*both)
      return run_bench(mode::both, both_opts);
    if (*census)
      return run_bench(mode::census, census_opts);
    if (*stress)
      return run_stress(stress_opts);
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
