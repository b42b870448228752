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
#include <string>
#include <vector>

#include "ssbc/coin.hpp"
#include "ssbc/rng.hpp"
#include "ssbc/types.hpp"
#include "ssbc/wire.hpp"

namespace ssbc {

enum class AdversaryKind : std::uint8_t {
  None,
  Crash,          // drops every outbound message of captured nodes
  SplitVote,      // est={0} to the low half of nodes, est={1} to the high half
  Spoiler,        // per destination, pushes the value it believes maximizes disagreement
  RandomGarbage,  // domain-valid random fields
  Delayer,        // forwards intact but with extra scheduling latency
};

std::string adversary_kind_name(AdversaryKind k);
AdversaryKind parse_adversary_kind(const std::string& name);

struct AdversaryStrategy {
  AdversaryKind kind = AdversaryKind::None;
  std::uint64_t garbage_seed = 0;
  std::uint64_t delay_bound = 64;  // extra delivery latency, in events
};

/// Which nodes the adversary captured; never more than t of them.
struct FaultConfig {
  std::vector<std::uint32_t> faulty;
  AdversaryStrategy strategy;

  void validate(const SystemConfig& cfg) const;
  std::vector<bool> faulty_mask(std::uint32_t n) const;
};

/// What the adversary has observed. Only traffic with a faulty endpoint is
/// ever recorded here; correct-to-correct payloads are private. Coin access
/// is clamped to rounds some correct node has already reached.
class AdversaryView {
 public:
  AdversaryView() = default;
  AdversaryView(std::uint32_t n, std::uint64_t seed) : leanings_(n, 255), rng_(seed) {}

  void observe(const WireMessage& msg);

  /// Last estimate singleton observed from a node, 255 when unknown.
  std::uint8_t leaning(std::uint32_t node) const { return leanings_[node]; }

  const std::vector<WireMessage>& observed() const { return observed_; }
  Rng& rng() { return rng_; }

 private:
  std::vector<std::uint8_t> leanings_;
  std::vector<WireMessage> observed_;
  Rng rng_;
};

/// One replacement the strategy emits towards a destination.
struct AdversaryOutput {
  WireMessage msg;
  std::uint64_t extra_delay = 0;
};

/// Rewrites one outbound message of a captured node for one destination.
/// An empty result drops the message. The sender identity is preserved;
/// acting for a non-faulty src is a contract violation.
std::vector<AdversaryOutput> apply_adversary(const AdversaryStrategy& strategy,
                                             const FaultConfig& faults,
                                             const SystemConfig& cfg, std::uint32_t src,
                                             std::uint32_t dst, const WireMessage& msg,
                                             AdversaryView& view,
                                             const AdversaryCoinView& coin);

}  // namespace ssbc
