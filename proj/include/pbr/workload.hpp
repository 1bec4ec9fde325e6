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

#pragma once

// Set-building micro-benchmark: an input array holding `unique_keys`
// distinct numbers, each repeated 100/unique_pct times on average, is
// inserted concurrently (fill) and then looked up again (lookup).

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <latch>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pbr/concurrent_map.hpp"
#include "pbr/instrumentation.hpp"

namespace pbr::bench {

/// SplitMix64 step; seeds the main generator and scrambles key ids.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// xorshift64* (Vigna). Satisfies UniformRandomBitGenerator.
class xorshift64star {
 public:
  using result_type = std::uint64_t;

  explicit xorshift64star(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {
    if (state_ == 0)
      state_ = 0x9e3779b97f4a7c15ULL;
  }

  static constexpr result_type min() noexcept { return 1; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

  /// Uniform in [0, bound) by multiply-shift; platform independent.
  std::uint64_t below(std::uint64_t bound) noexcept {
    __extension__ using wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<wide>((*this)()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

struct workload_spec {
  std::uint64_t unique_keys = std::uint64_t{1} << 17;
  unsigned unique_pct = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t initial_buckets = 512;

  std::uint64_t array_length() const {
    if (unique_keys == 0)
      throw std::invalid_argument("unique_keys must be positive");
    if (unique_pct == 0 || unique_pct > 100)
      throw std::invalid_argument("unique_pct must be in 1..100");
    return (unique_keys * 100 + unique_pct / 2) / unique_pct;
  }
};

/// The distinct value with rank `id`; a bijection of `id` for a fixed seed.
constexpr std::uint64_t unique_value(std::uint64_t id, std::uint64_t seed) noexcept {
  return splitmix64(id + splitmix64(seed));
}

/// Deterministic input array: every distinct value once, the remaining slots
/// drawn uniformly from the distinct values, then a Fisher-Yates shuffle.
inline std::vector<std::uint64_t> generate_workload(const workload_spec& spec) {
  const std::uint64_t length = spec.array_length();
  std::vector<std::uint64_t> keys;
  keys.reserve(length);
  for (std::uint64_t id = 0; id < spec.unique_keys; ++id) keys.push_back(unique_value(id, spec.seed));
  xorshift64star rng(spec.seed);
  while (keys.size() < length) keys.push_back(unique_value(rng.below(spec.unique_keys), spec.seed));
  for (std::uint64_t i = length - 1; i > 0; --i) std::swap(keys[i], keys[rng.below(i + 1)]);
  return keys;
}

enum class phase { fill, lookup };

inline const char* to_string(phase p) noexcept { return p == phase::fill ? "fill" : "lookup"; }

struct bench_report {
  phase stage = phase::fill;
  unsigned threads = 1;
  unsigned unique_pct = 100;
  std::uint64_t unique_keys = 0;
  std::uint64_t total_ops = 0;
  double seconds = 0;
  double throughput = 0;
  std::uint64_t restarts = 0;
  std::uint64_t growths = 0;
  /// fill: successful inserts; lookup: hits.
  std::uint64_t succeeded = 0;
  std::optional<census_report> census;
};

using bench_map = concurrent_map<std::uint64_t, std::uint64_t>;

/// Splits [0, n) into `threads` contiguous chunks, runs `work(begin, end)`
/// on one thread per chunk and returns the wall time from the moment every
/// worker is ready until the last one finishes.
template <class Work>
double run_chunked(std::size_t n, unsigned threads, Work&& work) {
  if (threads == 0)
    throw std::invalid_argument("thread count must be positive");
  std::latch ready(threads);
  std::latch go(1);
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = n * t / threads;
    const std::size_t end = n * (t + 1) / threads;
    workers.emplace_back([&, t, begin, end] {
      ready.count_down();
      go.wait();
      work(t, begin, end);
    });
  }
  ready.wait();
  const auto start = std::chrono::steady_clock::now();
  go.count_down();
  for (auto& w : workers) w.join();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class Map>
bench_report run_fill(Map& map, std::span<const std::uint64_t> keys, unsigned threads) {
  const counters_snapshot before = map.stats();
  std::vector<std::uint64_t> inserted(threads, 0);
  bench_report report;
  report.stage = phase::fill;
  report.threads = threads;
  report.total_ops = keys.size();
  report.seconds = run_chunked(keys.size(), threads, [&](unsigned t, std::size_t b, std::size_t e) {
    std::uint64_t local = 0;
    for (std::size_t i = b; i < e; ++i) local += map.insert(keys[i], keys[i]) ? 1 : 0;
    inserted[t] = local;
  });
  for (auto n : inserted) report.succeeded += n;
  const counters_snapshot after = map.stats();
  report.restarts = after.restarts - before.restarts;
  report.growths = after.growths - before.growths;
  report.unique_keys = map.size();
  report.throughput = report.seconds > 0 ? static_cast<double>(report.total_ops) / report.seconds : 0;
  return report;
}

template <class Map>
bench_report run_lookup(const Map& map, std::span<const std::uint64_t> keys, unsigned threads) {
  const counters_snapshot before = map.stats();
  std::vector<std::uint64_t> hits(threads, 0);
  bench_report report;
  report.stage = phase::lookup;
  report.threads = threads;
  report.total_ops = keys.size();
  report.seconds = run_chunked(keys.size(), threads, [&](unsigned t, std::size_t b, std::size_t e) {
    std::uint64_t local = 0;
    for (std::size_t i = b; i < e; ++i) local += map.contains(keys[i]) ? 1 : 0;
    hits[t] = local;
  });
  for (auto n : hits) report.succeeded += n;
  const counters_snapshot after = map.stats();
  report.restarts = after.restarts - before.restarts;
  report.growths = after.growths - before.growths;
  report.unique_keys = map.size();
  report.throughput = report.seconds > 0 ? static_cast<double>(report.total_ops) / report.seconds : 0;
  return report;
}

inline constexpr const char* csv_header =
    "phase,threads,unique_pct,unique_keys,total_ops,seconds,throughput,restarts,growths,"
    "rehashed,empty,overpopulated,max_chain";

inline void write_csv_row(std::ostream& out, const bench_report& r) {
  out << to_string(r.stage) << ',' << r.threads << ',' << r.unique_pct << ',' << r.unique_keys
      << ',' << r.total_ops << ',' << r.seconds << ',' << r.throughput << ',' << r.restarts << ','
      << r.growths << ',';
  if (r.census)
    out << r.census->rehashed << ',' << r.census->empty << ',' << r.census->overpopulated << ','
        << r.census->max_chain;
  else
    out << ",,,";
  out << '\n';
}

inline void write_csv(std::ostream& out, std::span<const bench_report> reports, bool header = true) {
  if (header)
    out << csv_header << '\n';
  for (const auto& r : reports) write_csv_row(out, r);
}

/// Appends rows to `path`, writing the header first if the file is new or
/// empty. Throws std::runtime_error on I/O failure.
inline void emit_report(std::span<const bench_report> reports, const std::string& path) {
  bool need_header = true;
  {
    std::ifstream existing(path, std::ios::binary | std::ios::ate);
    if (existing && existing.tellg() > 0)
      need_header = false;
  }
  std::ofstream out(path, std::ios::app);
  if (!out)
    throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out, reports, need_header);
  out.flush();
  if (!out)
    throw std::runtime_error("write to " + path + " failed");
}

}  // namespace pbr::bench
