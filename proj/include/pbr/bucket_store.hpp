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

#include <array>
#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "pbr/hash_geometry.hpp"
#include "pbr/spin_rw_mutex.hpp"

namespace pbr {

enum class bucket_state : std::uint8_t { fresh, rehashed };

enum class slot_status : std::uint8_t { empty, claimed, published };

inline constexpr std::size_t cache_line_size = 64;

/// One chain head plus its lock and rehash marker. `Node` must expose a
/// `Node* next` member; the store never looks inside chains otherwise.
template <class Node>
struct bucket {
  spin_rw_mutex mutex;
  std::atomic<bucket_state> state{bucket_state::fresh};
  Node* head = nullptr;

  bool is_fresh() const noexcept {
    return state.load(std::memory_order_acquire) == bucket_state::fresh;
  }
};

/// Segmented bucket storage with lock-free doubling.
///
/// The first `initial_buckets` buckets are allocated as one block at
/// construction and every segment slot they cover is routed into it. Later
/// segments are added one at a time: a thread wins the slot with a CAS
/// (`claim_growth`), allocates the buckets marked fresh, publishes the slot,
/// and only then stores the doubled mask. Readers that observe a mask can
/// therefore always dereference every bucket it covers.
template <class Node>
class bucket_store {
 public:
  using bucket_type = bucket<Node>;

  static constexpr std::size_t default_initial_buckets = 512;

  explicit bucket_store(std::size_t initial_buckets = default_initial_buckets) {
    if (initial_buckets < 2 || !std::has_single_bit(initial_buckets))
      throw contract_violation("initial bucket count must be a power of two >= 2, got " +
                               std::to_string(initial_buckets));
    initial_block_ = std::make_unique<bucket_type[]>(initial_buckets);
    for (std::size_t i = 0; i < initial_buckets; ++i)
      initial_block_[i].state.store(bucket_state::rehashed, std::memory_order_relaxed);
    const auto initial_segments = static_cast<segment_index>(std::bit_width(initial_buckets) - 1);
    for (segment_index k = 0; k < initial_segments; ++k) {
      slots_[k].storage.store(initial_block_.get() + segment_base(k), std::memory_order_relaxed);
      slots_[k].status.store(slot_status::published, std::memory_order_relaxed);
    }
    initial_mask_ = mask::for_capacity(initial_buckets);
    header_.mask_word.store(initial_mask_.value(), std::memory_order_release);
  }

  bucket_store(const bucket_store&) = delete;
  bucket_store& operator=(const bucket_store&) = delete;

  mask current_mask() const noexcept {
    return mask(header_.mask_word.load(std::memory_order_acquire));
  }

  mask initial_mask() const noexcept { return initial_mask_; }

  std::atomic<std::uint64_t>& pair_counter() noexcept { return header_.pair_count; }
  const std::atomic<std::uint64_t>& pair_counter() const noexcept { return header_.pair_count; }

  /// Requires a mask covering `i` to have been observed.
  bucket_type& bucket_at(bucket_index i) const {
    const segment_index k = segment_index_of(i);
    bucket_type* segment = slots_[k].storage.load(std::memory_order_acquire);
    if (segment == nullptr)
      throw contract_violation("bucket " + std::to_string(i) + " lies in an unpublished segment");
    return segment[i - segment_base(k)];
  }

  slot_status status_of(segment_index k) const noexcept {
    return slots_[k].status.load(std::memory_order_acquire);
  }

  /// Tries to win the next segment slot after `observed`. Only one caller per
  /// slot ever gets a value back.
  std::optional<segment_index> claim_growth(mask observed) noexcept {
    const segment_index k = segment_index_of(observed.capacity());
    if (k >= slots_.size())
      return std::nullopt;
    auto expected = slot_status::empty;
    if (slots_[k].status.load(std::memory_order_relaxed) != expected)
      return std::nullopt;
    if (!slots_[k].status.compare_exchange_strong(expected, slot_status::claimed,
                                                  std::memory_order_acq_rel,
                                                  std::memory_order_relaxed))
      return std::nullopt;
    return k;
  }

  /// Allocates and publishes claimed segment `k`, then doubles the mask.
  /// Returns false if allocation failed; the slot then stays claimed and the
  /// table keeps its current capacity for good.
  bool allocate_and_publish(segment_index k) {
    if (k == 0 || k >= slots_.size() || status_of(k) != slot_status::claimed)
      throw contract_violation("segment " + std::to_string(k) + " is not claimed");
    const std::uint64_t n = segment_size(k);
    if (header_.mask_word.load(std::memory_order_relaxed) != n - 1)
      throw contract_violation("segment " + std::to_string(k) + " does not follow the current mask");
    std::unique_ptr<bucket_type[]> segment;
    try {
      if (fail_next_allocation_.exchange(false, std::memory_order_relaxed))
        throw std::bad_alloc();
      // Value-initialised buckets are born fresh.
      segment = std::make_unique<bucket_type[]>(n);
    } catch (const std::bad_alloc&) {
      growth_stalled_.store(true, std::memory_order_relaxed);
      return false;
    }
    bucket_type* raw = segment.get();
    owned_[k] = std::move(segment);
    slots_[k].storage.store(raw, std::memory_order_release);
    slots_[k].status.store(slot_status::published, std::memory_order_release);
    const std::uint64_t capacity = 2 * n;
    header_.mask_word.store(capacity - 1, std::memory_order_release);
    return true;
  }

  bool growth_stalled() const noexcept { return growth_stalled_.load(std::memory_order_relaxed); }

  /// Test hook: the next allocate_and_publish behaves as if out of memory.
  void fail_next_allocation() noexcept { fail_next_allocation_.store(true, std::memory_order_relaxed); }

 private:
  struct segment_slot {
    std::atomic<slot_status> status{slot_status::empty};
    std::atomic<bucket_type*> storage{nullptr};
  };

  struct table_header {
    alignas(cache_line_size) std::atomic<std::uint64_t> mask_word{1};
    alignas(cache_line_size) std::atomic<std::uint64_t> pair_count{0};
  };

  table_header header_;
  std::array<segment_slot, hash_bits> slots_{};
  std::unique_ptr<bucket_type[]> initial_block_;
  std::array<std::unique_ptr<bucket_type[]>, hash_bits> owned_{};
  mask initial_mask_;
  std::atomic<bool> growth_stalled_{false};
  std::atomic<bool> fail_next_allocation_{false};
};

}  // namespace pbr
