/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>

namespace ssbc {

/// Common-coin service: every node querying the same (seed, round) observes
/// the same bit. Bits are a counter-mode PRF of the seed and round index,
/// so schedules are replayable and disjoint across trial seeds.
class CoinSchedule {
 public:
  CoinSchedule() = default;
  explicit CoinSchedule(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Coin bit for round r >= 1. Throws on r == 0; round 0 has no coin.
  std::uint8_t bit(std::uint32_t round) const;

  bool operator==(const CoinSchedule&) const = default;

 private:
  std::uint64_t seed_ = 0;
};

/// Gate restricting an adversary to coin bits of rounds some correct node
/// has already reached. Strategies cannot see future coin values.
class AdversaryCoinView {
 public:
  AdversaryCoinView(const CoinSchedule& sched, const std::uint32_t& max_correct_round)
      : sched_(&sched), max_round_(&max_correct_round) {}

  std::uint8_t bit(std::uint32_t round) const;
  std::uint32_t horizon() const { return *max_round_; }

 private:
  const CoinSchedule* sched_;
  const std::uint32_t* max_round_;
};

}  // namespace ssbc
