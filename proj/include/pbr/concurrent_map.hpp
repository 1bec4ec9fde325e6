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

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <utility>

#include "pbr/bucket_store.hpp"
#include "pbr/hash_geometry.hpp"
#include "pbr/hasher.hpp"
#include "pbr/instrumentation.hpp"
#include "pbr/lock_order.hpp"

namespace pbr {

namespace testing {
template <class Map>
struct table_access;
}  // namespace testing

/// Receives lookup events; the default one compiles to nothing.
struct null_tracer {
  void on_search(bucket_index, bool /*hit*/) noexcept {}
  void on_race_check(bucket_index /*consulted*/, bool /*race*/) noexcept {}
  void on_restart(mask /*fresh*/) noexcept {}
};

/// Chained hash map that grows without a global lock.
///
/// Growth only appends a segment of fresh buckets and publishes a doubled
/// mask. Pairs move lazily: the first operation that locks a fresh bucket
/// splits it off its parent (recursively, if the parent is fresh too). A
/// lookup that misses with a stale mask checks whether the next child bucket
/// on the key's path has started rehashing, and restarts with the new mask if
/// so; no operation ever takes more than a bucket lock and, while rehashing,
/// the locks of its ancestors in decreasing index order.
///
/// Insertion never overwrites. find() hands the pair to a visitor while the
/// bucket lock is held, so no reference outlives the lock.
template <class Key, class Value, class Hasher = default_hasher<Key>,
          class Counters = counters, class KeyEqual = std::equal_to<Key>>
  requires key_hasher<Hasher, Key>
class concurrent_map {
 public:
  using key_type = Key;
  using mapped_type = Value;
  using hasher = Hasher;
  using key_equal = KeyEqual;
  using counters_type = Counters;

  struct node {
    node* next = nullptr;
    hash_code hash = 0;
    Key key;
    Value value;
  };

  /// Forward range over one bucket's chain.
  class chain_view {
   public:
    class iterator {
     public:
      using iterator_category = std::forward_iterator_tag;
      using value_type = node;
      using difference_type = std::ptrdiff_t;
      using pointer = const node*;
      using reference = const node&;

      iterator() = default;
      explicit iterator(const node* n) : current_(n) {}
      reference operator*() const { return *current_; }
      pointer operator->() const { return current_; }
      iterator& operator++() {
        current_ = current_->next;
        return *this;
      }
      iterator operator++(int) {
        iterator copy = *this;
        ++*this;
        return copy;
      }
      friend bool operator==(iterator, iterator) = default;

     private:
      const node* current_ = nullptr;
    };

    explicit chain_view(const node* head) : head_(head) {}
    iterator begin() const { return iterator(head_); }
    iterator end() const { return iterator(); }
    bool empty() const { return head_ == nullptr; }

   private:
    const node* head_;
  };

  explicit concurrent_map(std::size_t initial_buckets = bucket_store<node>::default_initial_buckets,
                          Hasher hash = Hasher(), KeyEqual equal = KeyEqual())
      : store_(initial_buckets), hash_(std::move(hash)), equal_(std::move(equal)) {}

  concurrent_map(const concurrent_map&) = delete;
  concurrent_map& operator=(const concurrent_map&) = delete;

  ~concurrent_map() {
    const mask m = store_.current_mask();
    for (bucket_index i = 0; i <= m.value(); ++i) {
      node* n = store_.bucket_at(i).head;
      while (n != nullptr) delete std::exchange(n, n->next);
    }
  }

  /// Adds the pair if `key` is absent. Returns false (and drops `value`) if
  /// the key is already present.
  bool insert(Key key, Value value) {
    null_tracer tracer;
    return insert_from(std::move(key), std::move(value), store_.current_mask(), tracer);
  }

  /// Calls `visit(const Key&, const Value&)` under the bucket lock on a hit.
  template <class Visitor>
  bool find(const Key& key, Visitor&& visit) const {
    null_tracer tracer;
    return find_from(key, store_.current_mask(), tracer, std::forward<Visitor>(visit));
  }

  bool contains(const Key& key) const {
    return find(key, [](const Key&, const Value&) {});
  }

  std::optional<Value> get(const Key& key) const {
    std::optional<Value> out;
    find(key, [&](const Key&, const Value& v) { out.emplace(v); });
    return out;
  }

  bool erase(const Key& key) {
    null_tracer tracer;
    return erase_from(key, store_.current_mask(), tracer);
  }

  /// Pair count; exact only when no thread is mutating.
  std::uint64_t size() const noexcept {
    return store_.pair_counter().load(std::memory_order_relaxed);
  }

  bool empty() const noexcept { return size() == 0; }

  mask current_mask() const noexcept { return store_.current_mask(); }
  std::uint64_t bucket_count() const noexcept { return current_mask().capacity(); }
  std::uint64_t initial_bucket_count() const noexcept { return store_.initial_mask().capacity(); }

  /// Doublings since construction, derived from the mask.
  unsigned levels_grown() const noexcept {
    return current_mask().level() - store_.initial_mask().level();
  }

  /// Locks every bucket once so that all pending splits happen. Meant for
  /// quiescent maintenance: pairs sit in bucket `hash & mask` afterwards.
  void force_rehash_all() {
    const mask m = store_.current_mask();
    for (bucket_index i = 0; i <= m.value(); ++i) acquire_bucket(i, true);
  }

  /// Read-locks bucket `i` without splitting it and calls
  /// `f(bucket_state, chain_view)`. Requires `i <= current_mask()`.
  template <class F>
  void inspect_bucket(bucket_index i, F&& f) const {
    auto& b = store_.bucket_at(i);
    bucket_lock lock(b, i, false);
    f(b.state.load(std::memory_order_acquire), chain_view(b.head));
  }

  counters_snapshot stats() const noexcept {
    counters_snapshot s = counters_.snapshot();
    s.stalled_growth = store_.growth_stalled();
    return s;
  }

  const Hasher& hash_function() const noexcept { return hash_; }

 private:
  friend struct testing::table_access<concurrent_map>;

  using bucket_type = typename bucket_store<node>::bucket_type;

  // Scoped shared or exclusive hold on one bucket.
  class bucket_lock {
   public:
    bucket_lock() = default;

    bucket_lock(bucket_type& b, bucket_index index, bool write)
        : bucket_(&b), index_(index), writer_(write) {
      lock_order::on_acquire(index_);
      if (writer_)
        b.mutex.lock();
      else
        b.mutex.lock_shared();
    }

    bucket_lock(bucket_lock&& other) noexcept
        : bucket_(std::exchange(other.bucket_, nullptr)), index_(other.index_),
          writer_(other.writer_) {}

    bucket_lock& operator=(bucket_lock&& other) noexcept {
      if (this != &other) {
        release();
        bucket_ = std::exchange(other.bucket_, nullptr);
        index_ = other.index_;
        writer_ = other.writer_;
      }
      return *this;
    }

    ~bucket_lock() { release(); }

    void release() noexcept {
      if (bucket_ == nullptr)
        return;
      if (writer_)
        bucket_->mutex.unlock();
      else
        bucket_->mutex.unlock_shared();
      lock_order::on_release(index_);
      bucket_ = nullptr;
    }

    bucket_type& operator*() const noexcept { return *bucket_; }
    bucket_type* operator->() const noexcept { return bucket_; }
    bool is_writer() const noexcept { return writer_; }
    bucket_index index() const noexcept { return index_; }

   private:
    bucket_type* bucket_ = nullptr;
    bucket_index index_ = 0;
    bool writer_ = false;
  };

  // Locks bucket i, splitting it off its parent first if it is still fresh.
  // A reader that sees a fresh marker comes back as a writer.
  bucket_lock acquire_bucket(bucket_index i, bool write) const {
    bucket_type& b = store_.bucket_at(i);
    if (!write) {
      bucket_lock shared(b, i, false);
      if (!b.is_fresh())
        return shared;
      shared.release();
    }
    bucket_lock exclusive(b, i, true);
    if (b.is_fresh())
      rehash_bucket(b, i);
    return exclusive;
  }

  // b_new is bucket i, write-locked and fresh.
  void rehash_bucket(bucket_type& b_new, bucket_index i) const {
    // The marker flips before any pair arrives; is_race relies on it.
    b_new.state.store(bucket_state::rehashed, std::memory_order_release);
    bucket_lock parent = acquire_bucket(parent_index(i), true);
    const std::uint64_t full = level_mask(i).value();
    node** link = &parent->head;
    while (*link != nullptr) {
      node* n = *link;
      if ((n->hash & full) == i) {
        *link = n->next;
        n->next = b_new.head;
        b_new.head = n;
      } else {
        link = &n->next;
      }
    }
    counters_.on_rehash();
  }

  // True when the key's next child bucket after `old` is, or has been,
  // rehashed, so a miss under `old` cannot be trusted.
  template <class Tracer>
  bool is_race(hash_code h, mask old, Tracer& tracer) const {
    const bucket_index child = bucket_index_of(h, next_child_mask(h, old));
    const bool race = !store_.bucket_at(child).is_fresh();
    tracer.on_race_check(child, race);
    return race;
  }

  // Miss under `m` while holding bucket h & m. On true, `m` is the fresh
  // mask and the caller must drop its lock and retry.
  template <class Tracer>
  bool stale_miss(hash_code h, mask& m, Tracer& tracer) const {
    const mask now = store_.current_mask();
    if (bucket_index_of(h, m) == bucket_index_of(h, now) || !is_race(h, m, tracer))
      return false;
    assert(now > m);
    m = now;
    return true;
  }

  node* search(const bucket_type& b, hash_code h, const Key& key) const {
    for (node* n = b.head; n != nullptr; n = n->next)
      if (n->hash == h && equal_(n->key, key))
        return n;
    return nullptr;
  }

  template <class Tracer>
  bool insert_from(Key key, Value value, mask m, Tracer& tracer) {
    const hash_code h = hash_(key);
    for (;;) {
      bucket_lock b = acquire_bucket(bucket_index_of(h, m), true);
      const bool hit = search(*b, h, key) != nullptr;
      tracer.on_search(b.index(), hit);
      if (hit)
        return false;
      if (stale_miss(h, m, tracer)) {
        b.release();
        counters_.on_restart();
        tracer.on_restart(m);
        continue;
      }
      // Built before counting so a throwing payload leaves the counter alone.
      auto fresh = std::make_unique<node>(node{nullptr, h, std::move(key), std::move(value)});
      const std::uint64_t before = store_.pair_counter().fetch_add(1, std::memory_order_relaxed);
      fresh->next = b->head;
      b->head = fresh.release();
      // Load factor above one: the pair just added exceeds the observed capacity.
      std::optional<segment_index> grow;
      if (before >= m.capacity())
        grow = store_.claim_growth(m);
      b.release();
      if (grow && store_.allocate_and_publish(*grow))
        counters_.on_growth();
      return true;
    }
  }

  template <class Tracer, class Visitor>
  bool find_from(const Key& key, mask m, Tracer& tracer, Visitor&& visit) const {
    const hash_code h = hash_(key);
    for (;;) {
      bucket_lock b = acquire_bucket(bucket_index_of(h, m), false);
      const node* n = search(*b, h, key);
      tracer.on_search(b.index(), n != nullptr);
      if (n != nullptr) {
        visit(std::as_const(n->key), std::as_const(n->value));
        return true;
      }
      if (stale_miss(h, m, tracer)) {
        b.release();
        counters_.on_restart();
        tracer.on_restart(m);
        continue;
      }
      return false;
    }
  }

  template <class Tracer>
  bool erase_from(const Key& key, mask m, Tracer& tracer) {
    const hash_code h = hash_(key);
    for (;;) {
      bucket_lock b = acquire_bucket(bucket_index_of(h, m), true);
      node** link = &b->head;
      while (*link != nullptr && !((*link)->hash == h && equal_((*link)->key, key)))
        link = &(*link)->next;
      tracer.on_search(b.index(), *link != nullptr);
      if (*link != nullptr) {
        std::unique_ptr<node> victim(*link);
        *link = victim->next;
        store_.pair_counter().fetch_sub(1, std::memory_order_relaxed);
        return true;
      }
      if (stale_miss(h, m, tracer)) {
        b.release();
        counters_.on_restart();
        tracer.on_restart(m);
        continue;
      }
      return false;
    }
  }

  bucket_store<node> store_;
  [[no_unique_address]] Hasher hash_;
  [[no_unique_address]] KeyEqual equal_;
  mutable Counters counters_;
};

}  // namespace pbr
