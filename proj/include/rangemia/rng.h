// Copyright 2026 The rangemia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RANGEMIA_RNG_H_
#define RANGEMIA_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace rangemia {

using Rng = std::mt19937_64;

// Seeds a generator from a run seed plus a stream key (a range id, a model
// index, ...), so independent streams stay reproducible whatever order they
// are consumed in.
inline Rng MakeRng(uint64_t seed, std::string_view key,
                   std::initializer_list<uint64_t> extra = {}) {
  std::vector<uint32_t> words;
  words.reserve(4 + key.size() + 2 * extra.size());
  words.push_back(static_cast<uint32_t>(seed));
  words.push_back(static_cast<uint32_t>(seed >> 32));
  for (uint64_t e : extra) {
    words.push_back(static_cast<uint32_t>(e));
    words.push_back(static_cast<uint32_t>(e >> 32));
  }
  words.push_back(static_cast<uint32_t>(key.size()));
  for (char c : key) words.push_back(static_cast<unsigned char>(c));
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

inline uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Small generator for hot paths that need a fresh stream per item.
class SplitMix64 {
 public:
  using result_type = uint64_t;
  explicit SplitMix64(uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~uint64_t{0}; }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix64(state_ - 0x9e3779b97f4a7c15ULL);
  }

 private:
  uint64_t state_;
};

}  // namespace rangemia

#endif  // RANGEMIA_RNG_H_
