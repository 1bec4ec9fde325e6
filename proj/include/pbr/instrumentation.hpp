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

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>

#include "pbr/bucket_store.hpp"
#include "pbr/hash_geometry.hpp"

namespace pbr {

struct counters_snapshot {
  std::uint64_t restarts = 0;
  std::uint64_t rehashes = 0;
  std::uint64_t growths = 0;
  bool stalled_growth = false;

  friend bool operator==(const counters_snapshot&, const counters_snapshot&) = default;
};

/// Relaxed event counters. Contention on them never affects table state.
class counters {
 public:
  static constexpr bool enabled = true;

  void on_restart() noexcept { restarts_.fetch_add(1, std::memory_order_relaxed); }
  void on_rehash() noexcept { rehashes_.fetch_add(1, std::memory_order_relaxed); }
  void on_growth() noexcept { growths_.fetch_add(1, std::memory_order_relaxed); }

  counters_snapshot snapshot() const noexcept {
    return {restarts_.load(std::memory_order_relaxed), rehashes_.load(std::memory_order_relaxed),
            growths_.load(std::memory_order_relaxed), false};
  }

 private:
  alignas(cache_line_size) std::atomic<std::uint64_t> restarts_{0};
  alignas(cache_line_size) std::atomic<std::uint64_t> rehashes_{0};
  std::atomic<std::uint64_t> growths_{0};
};

/// Drop-in for `counters` that compiles every event away.
class null_counters {
 public:
  static constexpr bool enabled = false;

  void on_restart() noexcept {}
  void on_rehash() noexcept {}
  void on_growth() noexcept {}
  counters_snapshot snapshot() const noexcept { return {}; }
};

struct census_report {
  std::uint64_t total_buckets = 0;
  std::uint64_t rehashed = 0;
  std::uint64_t empty = 0;
  std::uint64_t overpopulated = 0;
  std::uint64_t max_chain = 0;
  std::uint64_t pairs = 0;

  friend bool operator==(const census_report&, const census_report&) = default;
};

inline constexpr std::size_t default_overpopulation_threshold = 4;

/// Bucket census: markers, empty chains, chains longer than `threshold`.
/// Does not trigger rehashing. Exact only when no thread mutates the table.
template <class Map>
census_report census(const Map& map, std::size_t threshold = default_overpopulation_threshold) {
  census_report report;
  const mask m = map.current_mask();
  report.total_buckets = m.capacity();
  for (bucket_index i = 0; i <= m.value(); ++i) {
    map.inspect_bucket(i, [&](bucket_state state, const auto& chain) {
      std::uint64_t length = 0;
      for (const auto& node : chain) {
        (void)node;
        ++length;
      }
      if (state == bucket_state::rehashed)
        ++report.rehashed;
      if (length == 0)
        ++report.empty;
      if (length > threshold)
        ++report.overpopulated;
      report.max_chain = std::max(report.max_chain, length);
      report.pairs += length;
    });
  }
  return report;
}

template <class Map>
counters_snapshot snapshot_counters(const Map& map) {
  return map.stats();
}

}  // namespace pbr
