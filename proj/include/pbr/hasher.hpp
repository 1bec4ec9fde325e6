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

#include <concepts>
#include <cstdint>
#include <functional>
#include <type_traits>

#include "pbr/hash_geometry.hpp"

namespace pbr {

// Buckets are picked with the low bits of the hash, so the raw key bits are
// spread with an odd-constant multiply (moves entropy up) and folded back
// down with a high-bit xor-shift.
constexpr hash_code mix_bits(std::uint64_t x) noexcept {
  x *= 0x9e3779b97f4a7c15ULL;
  x ^= x >> 32;
  x *= 0xd6e8feb86659fd93ULL;
  x ^= x >> 32;
  return x;
}

template <class Key>
struct default_hasher {
  hash_code operator()(const Key& key) const noexcept(noexcept(std::hash<Key>{}(key))) {
    if constexpr (std::is_integral_v<Key> || std::is_enum_v<Key>)
      return mix_bits(static_cast<std::uint64_t>(key));
    else
      return mix_bits(static_cast<std::uint64_t>(std::hash<Key>{}(key)));
  }
};

/// Uses an integral key as its own hash; lets tests place keys in chosen buckets.
struct identity_hasher {
  template <std::integral Key>
  constexpr hash_code operator()(Key key) const noexcept {
    return static_cast<hash_code>(key);
  }
};

template <class H, class Key>
concept key_hasher = requires(const H& h, const Key& k) {
  { h(k) } -> std::convertible_to<hash_code>;
};

}  // namespace pbr
