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
#include "ssbc/coin.hpp"

#include <bit>
#include <stdexcept>

#include "ssbc/rng.hpp"

namespace ssbc {

std::uint8_t CoinSchedule::bit(std::uint32_t round) const {
  if (round == 0) throw std::logic_error("coin: round 0 has no coin bit");
  std::uint64_t word = mix64(seed_ + 0x9E3779B97F4A7C15ull * round);
  return static_cast<std::uint8_t>(std::popcount(word) & 1);
}

std::uint8_t AdversaryCoinView::bit(std::uint32_t round) const {
  if (round == 0 || round > *max_round_)
    throw std::logic_error("coin: adversary queried a round no correct node reached");
  return sched_->bit(round);
}

}  // namespace ssbc
