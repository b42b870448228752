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
#include "ssbc/faultgen.hpp"

#include "ssbc/rng.hpp"

namespace ssbc {
namespace {

BinSet random_est(Rng& rng) { return BinSet::from_bits(static_cast<std::uint8_t>(rng.next_below(4))); }

OptBin random_aux(Rng& rng) {
  const std::uint64_t pick = rng.next_below(3);
  if (pick == 2) return std::nullopt;
  return static_cast<Bin>(pick);
}

}  // namespace

void corrupt_node(NodeState& node, const CorruptionSpec& spec) {
  Rng rng(derive_seed(spec.seed, 0x4E0DEull + node.id()));
  const auto& cfg = node.config();
  if (rng.chance(spec.intensity))
    node.set_round(static_cast<std::uint32_t>(rng.next_below(cfg.m_rounds + 2)));
  for (std::uint32_t rr = 0; rr < node.rows(); ++rr) {
    for (std::uint32_t j = 0; j < cfg.n; ++j) {
      if (rng.chance(spec.intensity)) node.set_est_entry(rr, j, random_est(rng));
      if (rng.chance(spec.intensity)) node.set_aux_entry(rr, j, random_aux(rng));
    }
  }
}

void corrupt_channels(Network& net, const SystemConfig& cfg, const CorruptionSpec& spec,
                      std::uint64_t now) {
  if (!spec.corrupt_channels) return;
  Rng rng(derive_seed(spec.seed, 0xC4A77ull));
  const std::uint32_t capacity = net.params().capacity;
  for (auto& ch : net.channels()) {
    // Scramble what is in flight; sender and destination are fixed by the
    // channel itself and stay intact.
    for (auto& entry : ch.mutable_queue()) {
      if (rng.chance(spec.intensity)) {
        entry.msg.est_bits = random_est(rng).bits();
        entry.msg.set_aux(random_aux(rng));
        entry.msg.rnd = static_cast<std::uint16_t>(1 + rng.next_below(cfg.m_rounds + 1));
        entry.msg.ack_req = rng.next_below(2) != 0;
      }
    }
    const std::uint64_t inject =
        static_cast<std::uint64_t>(spec.intensity * static_cast<double>(capacity));
    for (std::uint64_t k = 0; k < inject; ++k) {
      WireMessage msg;
      msg.sender = static_cast<std::uint16_t>(ch.src());
      msg.dst = static_cast<std::uint16_t>(ch.dst());
      msg.kind = cfg.variant == Variant::Bounded && rng.next_below(2) == 1 ? MsgKind::Aux
                                                                           : MsgKind::Est;
      msg.ack_req = rng.next_below(2) != 0;
      msg.rnd = static_cast<std::uint16_t>(1 + rng.next_below(cfg.m_rounds + 1));
      msg.est_bits = random_est(rng).bits();
      msg.set_aux(random_aux(rng));
      ch.force_enqueue(msg, capacity, now);
    }
  }
}

}  // namespace ssbc
