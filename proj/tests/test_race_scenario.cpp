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

#include "pbr/testing/race_scenario.hpp"

using namespace pbr::testing;

TEST(RaceScenario, StaleLookupRestartsOnceAndFindsKeyInBucket14) {
  const auto r = replay_race_scenario(race_variant::two_levels_child_rehashed);
  EXPECT_TRUE(r.passed) << r.describe();
  EXPECT_EQ(r.restarts, 1u);
  EXPECT_EQ(r.found_in, 14u);
  ASSERT_EQ(r.trace.race_checks.size(), 1u);
  EXPECT_EQ(r.trace.race_checks[0].consulted, 6u);
}

TEST(RaceScenario, FreshChildMeansKeyIsStillInParent) {
  const auto r = replay_race_scenario(race_variant::two_levels_child_fresh);
  EXPECT_TRUE(r.passed) << r.describe();
  EXPECT_EQ(r.restarts, 0u);
  EXPECT_EQ(r.found_in, 2u);
}

TEST(RaceScenario, OneLevelGrowthChecksBucket6Directly) {
  const auto r = replay_race_scenario(race_variant::one_level_child_rehashed);
  EXPECT_TRUE(r.passed) << r.describe();
  EXPECT_EQ(r.restarts, 1u);
  EXPECT_EQ(r.found_in, 6u);
}

TEST(RaceScenario, DescribeListsEvents) {
  const auto r = replay_race_scenario();
  const std::string text = r.describe();
  EXPECT_NE(text.find("search bucket 2 miss"), std::string::npos) << text;
  EXPECT_NE(text.find("race check bucket 6 -> restart"), std::string::npos) << text;
  EXPECT_NE(text.find("search bucket 14 hit"), std::string::npos) << text;
}
