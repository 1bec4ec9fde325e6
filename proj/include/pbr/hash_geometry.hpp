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

// Index arithmetic for a power-of-two table that doubles by appending
// segments. Segment 0 holds buckets 0-1, segment k >= 1 holds buckets
// [2^k, 2^(k+1)). Every bucket i >= 2 has exactly one parent: i with its most
// significant bit cleared. Buckets 0 and 1 are roots.

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pbr {

using hash_code = std::uint64_t;
using bucket_index = std::uint64_t;
using segment_index = unsigned;

inline constexpr unsigned hash_bits = 64;

/// Thrown when a caller breaks a documented precondition.
class contract_violation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// capacity - 1 for a power-of-two capacity >= 2, i.e. an all-ones bit pattern.
class mask {
 public:
  constexpr mask() = default;

  constexpr explicit mask(std::uint64_t value) : value_(value) {
    if (!is_valid(value))
      throw contract_violation("mask must be of the form 2^k - 1 with k >= 1, got " +
                               std::to_string(value));
  }

  static constexpr bool is_valid(std::uint64_t value) noexcept {
    return value >= 1 && (value & (value + 1)) == 0;
  }

  static constexpr mask for_capacity(std::uint64_t capacity) { return mask(capacity - 1); }

  constexpr std::uint64_t value() const noexcept { return value_; }
  constexpr std::uint64_t capacity() const noexcept { return value_ + 1; }
  constexpr unsigned level() const noexcept { return static_cast<unsigned>(std::bit_width(value_)); }

  /// The mask of the table after one more doubling.
  constexpr mask doubled() const { return mask((value_ << 1) | 1); }

  friend constexpr bool operator==(mask, mask) = default;
  friend constexpr auto operator<=>(mask, mask) = default;

 private:
  std::uint64_t value_ = 1;
};

constexpr bucket_index bucket_index_of(hash_code h, mask m) noexcept { return h & m.value(); }

constexpr bool is_root(bucket_index i) noexcept { return i < 2; }

/// Bucket i with its most significant set bit cleared. Roots have no parent.
constexpr bucket_index parent_index(bucket_index i) {
  if (is_root(i))
    throw contract_violation("root bucket " + std::to_string(i) + " has no parent");
  return i & (std::bit_floor(i) - 1);
}

constexpr segment_index segment_index_of(bucket_index i) noexcept {
  return static_cast<segment_index>(std::bit_width(i | 1) - 1);
}

/// First bucket of segment k.
constexpr bucket_index segment_base(segment_index k) noexcept {
  return (bucket_index{1} << k) & ~bucket_index{1};
}

constexpr std::uint64_t segment_size(segment_index k) noexcept {
  return k == 0 ? 2 : std::uint64_t{1} << k;
}

/// Smallest mask under which bucket i is addressable.
constexpr mask level_mask(bucket_index i) noexcept {
  if (is_root(i))
    return mask{};
  // bit_width(i) < 64 is not guaranteed for i >= 2^63: fold the shift so the
  // top segment yields all ones.
  const auto width = std::bit_width(i);
  return mask(width >= hash_bits ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1);
}

/// Smallest all-ones mask above `old` that changes the bucket of `h`.
///
/// Walks capacity bits upward while the next bit of `h` is zero, then takes
/// the first set one. Requires a set bit of `h` above `old`; the walk is
/// bounded by the word width.
constexpr mask next_child_mask(hash_code h, mask old) {
  std::uint64_t m = old.value();
  for (unsigned step = old.level(); step < hash_bits; ++step) {
    const std::uint64_t next_bit = m + 1;
    m = (m << 1) | 1;
    if (h & next_bit)
      return mask(m);
  }
  throw contract_violation("hash has no set bit above the mask");
}

}  // namespace pbr
