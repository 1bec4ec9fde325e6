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

// Distinct words of stdin, collected by four threads into one map.

#include <iostream>
#include <iterator>
#include <string>
#include <thread>
#include <vector>

#include "pbr/concurrent_map.hpp"
#include "pbr/instrumentation.hpp"

int main() {
  std::vector<std::string> words{std::istream_iterator<std::string>(std::cin),
                                 std::istream_iterator<std::string>()};

  pbr::concurrent_map<std::string, std::size_t> first_seen(16);
  constexpr unsigned workers = 4;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < words.size(); i += workers) first_seen.insert(words[i], i);
      });
  }

  std::cout << words.size() << " words, " << first_seen.size() << " distinct, "
            << first_seen.bucket_count() << " buckets\n";
  for (const char* probe : {"the", "hash"}) {
    bool hit = first_seen.find(probe, [&](const std::string& w, std::size_t at) {
      std::cout << '"' << w << "\" first seen at or after word " << at << '\n';
    });
    if (!hit)
      std::cout << '"' << probe << "\" not present\n";
  }
  const pbr::census_report c = pbr::census(first_seen);
  std::cout << "census: " << c.rehashed << " rehashed, " << c.empty << " empty, max chain " << c.max_chain
            << '\n';
}
