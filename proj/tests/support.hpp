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

// Shared drivers for the randomized property suite and the seeded-mutation
// kill checks; used by both the unit-property binary and the acceptance
// suite.

#include <cstdint>
#include <string>
#include <vector>

#include "ssbc/campaign.hpp"
#include "ssbc/engine.hpp"
#include "ssbc/faultgen.hpp"
#include "ssbc/node.hpp"
#include "ssbc/rng.hpp"
#include "ssbc/scenario.hpp"

namespace ssbc::testing {

inline SystemConfig property_cfg(Mutation m = Mutation::None) {
  SystemConfig cfg;
  cfg.n = 4;
  cfg.t = 1;
  cfg.m_rounds = 8;
  cfg.variant = Variant::StabilizingSilent;
  cfg.mutation = m;
  return cfg;
}

inline EstMessage random_est_message(Rng& rng, std::uint32_t m_rounds) {
  EstMessage msg;
  msg.ack_req = rng.next_below(2) != 0;
  msg.rnd = static_cast<std::uint32_t>(1 + rng.next_below(m_rounds + 1));
  msg.est = BinSet::from_bits(static_cast<std::uint8_t>(rng.next_below(4)));
  const auto aux = rng.next_below(3);
  msg.aux = aux == 2 ? OptBin{} : OptBin{static_cast<Bin>(aux)};
  return msg;
}

inline NodeState random_corrupted_node(const SystemConfig& cfg, Rng& rng) {
  NodeState node(cfg, static_cast<std::uint32_t>(rng.next_below(cfg.n)));
  node.propose(static_cast<Bin>(rng.next_below(2)));
  CorruptionSpec spec;
  spec.seed = rng.next_u64();
  spec.intensity = 1.0;
  corrupt_node(node, spec);
  return node;
}

/// est tables only grow under message handling.
inline bool monotone_growth_holds(Mutation m, int sequences, std::uint64_t seed) {
  const SystemConfig cfg = property_cfg(m);
  Rng rng(seed);
  for (int s = 0; s < sequences; ++s) {
    NodeState node(cfg, 0);
    node.propose(static_cast<Bin>(rng.next_below(2)));
    for (int step = 0; step < 24; ++step) {
      const auto from = static_cast<std::uint32_t>((1 + rng.next_below(cfg.n - 1)) % cfg.n);
      const EstMessage msg = random_est_message(rng, cfg.m_rounds);
      std::vector<BinSet> before(node.rows() * cfg.n);
      for (std::uint32_t rr = 0; rr < node.rows(); ++rr)
        for (std::uint32_t j = 0; j < cfg.n; ++j) before[rr * cfg.n + j] = node.est_at(rr, j);
      node.on_est_message(from, msg);
      for (std::uint32_t rr = 0; rr < node.rows(); ++rr)
        for (std::uint32_t j = 0; j < cfg.n; ++j)
          if (!before[rr * cfg.n + j].subset_of(node.est_at(rr, j))) return false;
    }
  }
  return true;
}

/// Within one open round, successive broadcast est fields form an
/// inclusion chain under interleaved deliveries.
inline bool broadcast_chain_holds(Mutation m, int sequences, std::uint64_t seed) {
  const SystemConfig cfg = property_cfg(m);
  Rng rng(seed);
  for (int s = 0; s < sequences; ++s) {
    NodeState node(cfg, 0);
    node.propose(static_cast<Bin>(rng.next_below(2)));
    node.begin_iteration();
    BinSet previous;
    for (int pass = 0; pass < 12; ++pass) {
      const EstMessage payload = node.broadcast_payload();
      if (!previous.subset_of(payload.est)) return false;
      previous = payload.est;
      node.apply_self(payload);
      // Deliveries for the current round between loop passes.
      EstMessage incoming = random_est_message(rng, cfg.m_rounds);
      incoming.rnd = node.round();
      node.on_est_message(static_cast<std::uint32_t>(1 + rng.next_below(cfg.n - 1)), incoming);
    }
  }
  return true;
}

/// Applying the same record twice never changes more than applying it once.
inline bool duplicate_idempotence_holds(Mutation m, int sequences, std::uint64_t seed) {
  const SystemConfig cfg = property_cfg(m);
  Rng rng(seed);
  for (int s = 0; s < sequences; ++s) {
    NodeState once(cfg, 0);
    once.propose(0);
    NodeState twice = once;
    for (int step = 0; step < 16; ++step) {
      const auto from = static_cast<std::uint32_t>(1 + rng.next_below(cfg.n - 1));
      const EstMessage msg = random_est_message(rng, cfg.m_rounds);
      once.on_est_message(from, msg);
      twice.on_est_message(from, msg);
      twice.on_est_message(from, msg);
      for (std::uint32_t rr = 0; rr < once.rows(); ++rr)
        for (std::uint32_t j = 0; j < cfg.n; ++j) {
          if (once.est_at(rr, j) != twice.est_at(rr, j)) return false;
          if (once.aux_at(rr, j) != twice.aux_at(rr, j)) return false;
        }
    }
  }
  return true;
}

/// A filled decision slot survives further decide calls and deliveries.
inline bool decision_stability_holds(Mutation m, int sequences, std::uint64_t seed) {
  const SystemConfig cfg = property_cfg(m);
  Rng rng(seed);
  const std::uint32_t last = cfg.m_rounds + 1;
  for (int s = 0; s < sequences; ++s) {
    NodeState node = random_corrupted_node(cfg, rng);
    if (node.est_at(last, node.id()).empty() || !node.aux_at(last, node.id()).has_value()) {
      node.set_est_entry(last, node.id(), BinSet::of(static_cast<Bin>(rng.next_below(2))));
      node.set_aux_entry(last, node.id(), OptBin{node.est_at(last, node.id()).sole()});
    }
    if (!node.est_at(last, node.id()).is_singleton()) continue;
    const BinSet decided = node.est_at(last, node.id());
    node.decide(static_cast<Bin>(rng.next_below(2)));
    if (node.est_at(last, node.id()) != decided) return false;
    for (int step = 0; step < 8; ++step) {
      const auto peer = static_cast<std::uint32_t>(
          (node.id() + 1 + rng.next_below(cfg.n - 1)) % cfg.n);
      node.on_est_message(peer, random_est_message(rng, cfg.m_rounds));
    }
    if (node.est_at(last, node.id()) != decided) return false;
  }
  return true;
}

/// Stabilize and every subsequent transition leave the node resolved.
inline bool resolved_closure_holds(Mutation m, int sequences, std::uint64_t seed) {
  SystemConfig cfg = property_cfg(m);
  Rng rng(seed);
  const CoinSchedule coin(seed ^ 0xC01);
  for (int s = 0; s < sequences; ++s) {
    NodeState node = random_corrupted_node(cfg, rng);
    if (!node.is_active()) continue;
    node.begin_iteration();  // stabilize + advance
    if (!node.resolved()) return false;
    const EstMessage payload = node.broadcast_payload();
    node.apply_self(payload);
    if (!node.resolved()) return false;
    node.try_to_decide(node.info_result(), coin);
    node.close_iteration();
    if (!node.resolved()) return false;
    node.decide(static_cast<Bin>(rng.next_below(2)));
    if (!node.resolved()) return false;
    node.begin_iteration();
    if (!node.resolved()) return false;
  }
  return true;
}

/// propose() recovers the initial state from arbitrary corruption.
inline bool propose_reset_holds(Mutation m, int sequences, std::uint64_t seed) {
  const SystemConfig cfg = property_cfg(m);
  Rng rng(seed);
  for (int s = 0; s < sequences; ++s) {
    NodeState node = random_corrupted_node(cfg, rng);
    const Bin v = static_cast<Bin>(rng.next_below(2));
    node.propose(v);
    if (!node.is_active() || !node.resolved()) return false;
    if (node.round() != 0) return false;
    if (node.est_at(0, node.id()) != BinSet::of(v)) return false;
    for (std::uint32_t rr = 1; rr < node.rows(); ++rr)
      for (std::uint32_t j = 0; j < cfg.n; ++j)
        if (!node.est_at(rr, j).empty() || node.aux_at(rr, j).has_value()) return false;
  }
  return true;
}

struct MutationKill {
  Mutation mutation = Mutation::None;
  std::string tripped_oracle;
  std::uint64_t trials_until_trip = 0;  // 0 = never tripped
};

/// Runs the designated detector for one seeded mutation and reports which
/// oracle tripped and after how many trials (property suites count as one).
inline MutationKill run_mutation_kill(Mutation m) {
  MutationKill kill;
  kill.mutation = m;
  switch (m) {
    case Mutation::DecideGuardRemoved:
      if (!decision_stability_holds(m, 1000, 505)) {
        kill.tripped_oracle = "decision_stability";
        kill.trials_until_trip = 1;
      }
      return kill;
    case Mutation::StabilizeSkipped:
      if (!resolved_closure_holds(m, 1000, 606)) {
        kill.tripped_oracle = "resolved_closure";
        kill.trials_until_trip = 1;
      }
      return kill;
    default:
      break;
  }

  Scenario sc;
  sc.cfg.n = 4;
  sc.cfg.t = 1;
  sc.cfg.m_rounds = 10;
  sc.cfg.variant = Variant::StabilizingSilent;
  sc.cfg.mutation = m;
  sc.faults.faulty = {3};
  sc.base_seed = 24000;
  sc.trials = 50;
  std::string watch;
  switch (m) {
    case Mutation::InfoResultNoMembershipCheck:
      sc.proposal_rule = ProposalRule::Unanimous1;
      sc.faults.strategy.kind = AdversaryKind::RandomGarbage;
      watch = "bc_validity";
      break;
    case Mutation::PayloadWithoutEcho:
      sc.proposal_rule = ProposalRule::Split;
      sc.faults.strategy.kind = AdversaryKind::Crash;
      sc.step_budget = 60'000;
      watch = "bc_termination";
      break;
    case Mutation::DecideIgnoresCoin:
      sc.proposal_rule = ProposalRule::Split;
      sc.faults.strategy.kind = AdversaryKind::SplitVote;
      watch = "bc_agreement";
      break;
    default:
      return kill;
  }
  for (int batch = 0; batch < 20; ++batch) {  // at most 1000 trials
    sc.base_seed = 24000 + static_cast<std::uint64_t>(batch) * sc.trials;
    const CampaignResult result = run_campaign(sc, 0);
    for (std::size_t k = 0; k < result.reports.size(); ++k) {
      const OracleVerdicts& v = result.reports[k].verdicts;
      const bool hit = (watch == "bc_validity" && v.bc_validity == Verdict::Fail) ||
                       (watch == "bc_termination" && v.bc_termination == Verdict::Fail) ||
                       (watch == "bc_agreement" && v.bc_agreement == Verdict::Fail);
      if (hit) {
        kill.tripped_oracle = watch;
        kill.trials_until_trip = static_cast<std::uint64_t>(batch) * sc.trials + k + 1;
        return kill;
      }
    }
  }
  return kill;
}

inline std::vector<Mutation> all_mutations() {
  return {Mutation::InfoResultNoMembershipCheck, Mutation::DecideGuardRemoved,
          Mutation::StabilizeSkipped, Mutation::PayloadWithoutEcho, Mutation::DecideIgnoresCoin};
}

}  // namespace ssbc::testing
