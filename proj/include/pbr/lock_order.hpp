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

// Bucket locks must be taken in strictly decreasing index order (a child,
// then its parent, then the grandparent...). With PBR_CHECK_LOCK_ORDER
// defined every acquisition is checked against the bucket locks the calling
// thread already holds; violations are counted and, without NDEBUG, abort.

#include <atomic>
#include <cassert>
#include <cstdint>
#include <vector>

namespace pbr::lock_order {

#if defined(PBR_CHECK_LOCK_ORDER)

inline constexpr bool enabled = true;

inline std::atomic<std::uint64_t>& violation_counter() noexcept {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

inline std::atomic<std::uint64_t>& nested_acquisition_counter() noexcept {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

inline std::vector<std::uint64_t>& held() {
  thread_local std::vector<std::uint64_t> stack;
  return stack;
}

inline void on_acquire(std::uint64_t index) {
  auto& stack = held();
  if (!stack.empty()) {
    nested_acquisition_counter().fetch_add(1, std::memory_order_relaxed);
    if (index >= stack.back()) {
      violation_counter().fetch_add(1, std::memory_order_relaxed);
      assert(!"bucket lock order violated: index must decrease");
    }
  }
  stack.push_back(index);
}

inline void on_release(std::uint64_t index) {
  auto& stack = held();
  // Releases are LIFO along a rehash chain.
  assert(!stack.empty() && stack.back() == index);
  if (!stack.empty() && stack.back() == index)
    stack.pop_back();
}

#else

inline constexpr bool enabled = false;

inline std::atomic<std::uint64_t>& violation_counter() noexcept {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

inline std::atomic<std::uint64_t>& nested_acquisition_counter() noexcept {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

inline void on_acquire(std::uint64_t) noexcept {}
inline void on_release(std::uint64_t) noexcept {}

#endif

inline std::uint64_t violations() noexcept {
  return violation_counter().load(std::memory_order_relaxed);
}

inline std::uint64_t nested_acquisitions() noexcept {
  return nested_acquisition_counter().load(std::memory_order_relaxed);
}

}  // namespace pbr::lock_order
