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
#include <vector>

#include "ssbc/channel.hpp"
#include "ssbc/node.hpp"

namespace ssbc {

/// Transient-fault recipe: which nodes/channels get hit and how hard.
/// Every value written stays inside the protocol's type domains; the
/// program state is scrambled, never the program.
struct CorruptionSpec {
  std::uint64_t seed = 0;
  double intensity = 1.0;  // per-field rewrite probability in [0,1]
  // Empty target lists mean "all correct nodes" / "all channels".
  std::vector<std::uint32_t> target_nodes;
  bool corrupt_channels = true;

  bool targets_node(std::uint32_t id) const {
    if (target_nodes.empty()) return true;
    for (auto t : target_nodes)
      if (t == id) return true;
    return false;
  }
};

/// Rewrites each protocol field of the node independently with probability
/// spec.intensity, drawing uniform domain values. Deterministic in
/// (state identity, spec).
void corrupt_node(NodeState& node, const CorruptionSpec& spec);

/// Scrambles in-transit payloads and injects fresh domain-valid messages,
/// up to the channel capacity. Endpoint fields are channel identity and are
/// never altered.
void corrupt_channels(Network& net, const SystemConfig& cfg, const CorruptionSpec& spec,
                      std::uint64_t now);

}  // namespace ssbc
