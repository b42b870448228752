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
#include "ssbc/adversary.hpp"

#include <algorithm>
#include <stdexcept>

namespace ssbc {

std::string adversary_kind_name(AdversaryKind k) {
  switch (k) {
    case AdversaryKind::None: return "none";
    case AdversaryKind::Crash: return "crash";
    case AdversaryKind::SplitVote: return "split-vote";
    case AdversaryKind::Spoiler: return "spoiler";
    case AdversaryKind::RandomGarbage: return "random-garbage";
    default: return "delayer";
  }
}

AdversaryKind parse_adversary_kind(const std::string& name) {
  if (name == "none") return AdversaryKind::None;
  if (name == "crash") return AdversaryKind::Crash;
  if (name == "split-vote") return AdversaryKind::SplitVote;
  if (name == "spoiler") return AdversaryKind::Spoiler;
  if (name == "random-garbage") return AdversaryKind::RandomGarbage;
  if (name == "delayer") return AdversaryKind::Delayer;
  throw std::invalid_argument(
      "unknown adversary kind '" + name +
      "'; valid kinds: none, crash, split-vote, spoiler, random-garbage, delayer");
}

void FaultConfig::validate(const SystemConfig& cfg) const {
  if (faulty.size() > cfg.t)
    throw std::invalid_argument("faults: more captured nodes than the bound t allows");
  for (auto id : faulty)
    if (id >= cfg.n) throw std::invalid_argument("faults: captured node id out of range");
}

std::vector<bool> FaultConfig::faulty_mask(std::uint32_t n) const {
  std::vector<bool> mask(n, false);
  for (auto id : faulty) mask[id] = true;
  return mask;
}

void AdversaryView::observe(const WireMessage& msg) {
  observed_.push_back(msg);
  const BinSet est = BinSet::from_bits(msg.est_bits);
  if (msg.kind == MsgKind::Est && est.is_singleton() && msg.sender < leanings_.size())
    leanings_[msg.sender] = est.sole();
}

namespace {

WireMessage with_est_aux(const WireMessage& base, BinSet est, OptBin aux) {
  WireMessage out = base;
  out.est_bits = est.bits();
  out.set_aux(aux);
  return out;
}

}  // namespace

std::vector<AdversaryOutput> apply_adversary(const AdversaryStrategy& strategy,
                                             const FaultConfig& faults,
                                             const SystemConfig& cfg, std::uint32_t src,
                                             std::uint32_t dst, const WireMessage& msg,
                                             AdversaryView& view,
                                             const AdversaryCoinView& coin) {
  const auto mask = faults.faulty_mask(cfg.n);
  if (src >= cfg.n || !mask[src])
    throw std::logic_error("adversary: may not act for a non-captured sender");

  switch (strategy.kind) {
    case AdversaryKind::None:
      return {{msg, 0}};

    case AdversaryKind::Crash:
      return {};

    case AdversaryKind::SplitVote: {
      const Bin half = dst < cfg.n / 2 ? Bin{0} : Bin{1};
      return {{with_est_aux(msg, BinSet::of(half), half), 0}};
    }

    case AdversaryKind::Spoiler: {
      // Push the complement of whatever the destination was last seen
      // estimating; fall back to the newest visible coin value so the
      // nudge stays plausible, or to the destination's parity before any
      // coin round opened.
      Bin target;
      const std::uint8_t lean = view.leaning(dst);
      if (lean <= 1) {
        target = static_cast<Bin>(1 - lean);
      } else if (coin.horizon() >= 1) {
        target = static_cast<Bin>(1 - coin.bit(coin.horizon()));
      } else {
        target = static_cast<Bin>(dst & 1);
      }
      return {{with_est_aux(msg, BinSet::of(target), target), 0}};
    }

    case AdversaryKind::RandomGarbage: {
      Rng& rng = view.rng();
      WireMessage out = msg;
      out.est_bits = static_cast<std::uint8_t>(rng.next_below(4));
      const std::uint64_t aux_pick = rng.next_below(3);
      out.set_aux(aux_pick == 2 ? OptBin{} : OptBin{static_cast<Bin>(aux_pick)});
      out.rnd = static_cast<std::uint16_t>(1 + rng.next_below(cfg.m_rounds + 1));
      out.ack_req = rng.next_below(2) != 0;
      return {{out, 0}};
    }

    case AdversaryKind::Delayer: {
      const std::uint64_t delay = view.rng().next_below(strategy.delay_bound + 1);
      return {{msg, delay}};
    }
  }
  return {{msg, 0}};
}

}  // namespace ssbc
