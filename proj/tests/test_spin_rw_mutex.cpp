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

#include <atomic>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <vector>

#include "pbr/spin_rw_mutex.hpp"

using pbr::spin_rw_mutex;

static_assert(sizeof(spin_rw_mutex) == 4);

TEST(SpinRwMutex, ExclusiveExcludesEveryone) {
  spin_rw_mutex m;
  m.lock();
  EXPECT_TRUE(m.is_locked());
  EXPECT_FALSE(m.try_lock());
  EXPECT_FALSE(m.try_lock_shared());
  m.unlock();
  EXPECT_FALSE(m.is_locked());
  EXPECT_TRUE(m.try_lock());
  m.unlock();
}

TEST(SpinRwMutex, ReadersShare) {
  spin_rw_mutex m;
  m.lock_shared();
  EXPECT_TRUE(m.try_lock_shared());
  EXPECT_FALSE(m.try_lock());
  m.unlock_shared();
  m.unlock_shared();
  EXPECT_TRUE(m.try_lock());
  m.unlock();
}

TEST(SpinRwMutex, CountsStayConsistentUnderContention) {
  spin_rw_mutex m;
  std::uint64_t counter = 0;
  std::atomic<int> readers_inside{0};
  std::atomic<bool> overlap{false};
  constexpr int per_thread = 20000;
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < per_thread; ++i) {
        std::unique_lock lock(m);
        if (readers_inside.load() != 0)
          overlap = true;
        ++counter;
      }
    });
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < per_thread; ++i) {
        std::shared_lock lock(m);
        readers_inside.fetch_add(1);
        volatile std::uint64_t seen = counter;
        (void)seen;
        readers_inside.fetch_sub(1);
      }
    });
  threads.clear();
  EXPECT_EQ(counter, 4u * per_thread);
  EXPECT_FALSE(overlap.load());
}
