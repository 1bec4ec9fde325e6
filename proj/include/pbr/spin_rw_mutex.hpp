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

#include <atomic>
#include <cstdint>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace pbr {

// Exponential pause loop that falls back to yielding; spinning alone starves
// the lock holder when threads outnumber cores.
class backoff {
 public:
  void pause() noexcept {
    if (count_ <= max_spins) {
      for (unsigned i = 0; i < count_; ++i) cpu_relax();
      count_ <<= 1;
    } else {
      std::this_thread::yield();
    }
  }

 private:
  static constexpr unsigned max_spins = 16;

  static void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    _mm_pause();
#elif defined(__aarch64__)
    asm volatile("yield");
#endif
  }

  unsigned count_ = 1;
};

/// Four-byte reader-writer spin lock with writer preference. Meets the
/// SharedMutex requirements so std::unique_lock / std::shared_lock work.
class spin_rw_mutex {
 public:
  spin_rw_mutex() = default;
  spin_rw_mutex(const spin_rw_mutex&) = delete;
  spin_rw_mutex& operator=(const spin_rw_mutex&) = delete;

  void lock() noexcept {
    backoff wait;
    for (;;) {
      std::uint32_t s = state_.load(std::memory_order_relaxed);
      if ((s & ~writer_pending) == 0) {
        if (state_.compare_exchange_weak(s, writer, std::memory_order_acquire,
                                         std::memory_order_relaxed))
          return;
      } else if ((s & writer_pending) == 0) {
        state_.fetch_or(writer_pending, std::memory_order_relaxed);
      }
      wait.pause();
    }
  }

  bool try_lock() noexcept {
    std::uint32_t s = state_.load(std::memory_order_relaxed);
    return (s & ~writer_pending) == 0 &&
           state_.compare_exchange_strong(s, writer, std::memory_order_acquire,
                                          std::memory_order_relaxed);
  }

  void unlock() noexcept { state_.fetch_and(readers, std::memory_order_release); }

  void lock_shared() noexcept {
    backoff wait;
    for (;;) {
      if ((state_.load(std::memory_order_relaxed) & (writer | writer_pending)) == 0) {
        const std::uint32_t prev = state_.fetch_add(one_reader, std::memory_order_acquire);
        if ((prev & writer) == 0)
          return;
        state_.fetch_sub(one_reader, std::memory_order_relaxed);
      }
      wait.pause();
    }
  }

  bool try_lock_shared() noexcept {
    if (state_.load(std::memory_order_relaxed) & (writer | writer_pending))
      return false;
    const std::uint32_t prev = state_.fetch_add(one_reader, std::memory_order_acquire);
    if ((prev & writer) == 0)
      return true;
    state_.fetch_sub(one_reader, std::memory_order_relaxed);
    return false;
  }

  void unlock_shared() noexcept { state_.fetch_sub(one_reader, std::memory_order_release); }

  bool is_locked() const noexcept {
    return (state_.load(std::memory_order_relaxed) & ~writer_pending) != 0;
  }

 private:
  static constexpr std::uint32_t writer = 1;
  static constexpr std::uint32_t writer_pending = 2;
  static constexpr std::uint32_t one_reader = 4;
  static constexpr std::uint32_t readers = ~(writer | writer_pending);

  std::atomic<std::uint32_t> state_{0};
};

}  // namespace pbr
