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
#include <doctest.h>

#include "support.hpp"

using namespace ssbc;
using namespace ssbc::testing;

TEST_CASE("est tables only grow under message handling") {
  CHECK(monotone_growth_holds(Mutation::None, 1000, 101));
}

TEST_CASE("broadcast est fields form inclusion chains within a round") {
  CHECK(broadcast_chain_holds(Mutation::None, 1000, 202));
}

TEST_CASE("duplicate deliveries are idempotent") {
  CHECK(duplicate_idempotence_holds(Mutation::None, 1000, 303));
}

TEST_CASE("a filled decision slot is stable") {
  CHECK(decision_stability_holds(Mutation::None, 1000, 505));
}

TEST_CASE("stabilize and all later transitions preserve resolvedness") {
  CHECK(resolved_closure_holds(Mutation::None, 1000, 606));
}

TEST_CASE("propose recovers the initial state from any corruption") {
  CHECK(propose_reset_holds(Mutation::None, 1000, 707));
}

TEST_CASE("every trial terminates under the fairness contract") {
  // The merged-loop variants may never block; drive them through every
  // built-in adversary with lossy channels.
  for (Variant variant : {Variant::Stabilizing, Variant::StabilizingSilent}) {
    for (AdversaryKind kind :
         {AdversaryKind::None, AdversaryKind::Crash, AdversaryKind::SplitVote,
          AdversaryKind::Spoiler, AdversaryKind::RandomGarbage, AdversaryKind::Delayer}) {
      Scenario sc;
      sc.cfg.n = 4;
      sc.cfg.t = 1;
      sc.cfg.m_rounds = 12;
      sc.cfg.variant = variant;
      sc.proposal_rule = ProposalRule::Split;
      sc.faults.faulty = {3};
      sc.faults.strategy.kind = kind;
      sc.trials = 120;
      sc.base_seed = 31000;
      const CampaignResult result = run_campaign(sc, 0);
      CHECK(result.summary.liveness_failures == 0);
    }
  }
}

TEST_CASE("each seeded protocol mutation trips at least one oracle") {
  for (Mutation m : all_mutations()) {
    CAPTURE(mutation_name(m));
    const MutationKill kill = run_mutation_kill(m);
    CHECK(kill.trials_until_trip > 0);
    CHECK(kill.trials_until_trip <= 1000);
    CHECK_FALSE(kill.tripped_oracle.empty());
  }
}

TEST_CASE("the unmutated protocol passes every mutation detector") {
  // The detectors must owe their kills to the mutations, not to flakiness.
  CHECK(decision_stability_holds(Mutation::None, 1000, 505));
  CHECK(resolved_closure_holds(Mutation::None, 1000, 606));
  Scenario sc;
  sc.cfg.n = 4;
  sc.cfg.t = 1;
  sc.cfg.m_rounds = 10;
  sc.cfg.variant = Variant::StabilizingSilent;
  sc.faults.faulty = {3};
  sc.base_seed = 24000;
  sc.trials = 200;
  sc.proposal_rule = ProposalRule::Unanimous1;
  sc.faults.strategy.kind = AdversaryKind::RandomGarbage;
  CHECK(run_campaign(sc, 0).summary.oracle_failures.empty());
  sc.proposal_rule = ProposalRule::Split;
  sc.faults.strategy.kind = AdversaryKind::SplitVote;
  CHECK(run_campaign(sc, 0).summary.oracle_failures.empty());
  sc.faults.strategy.kind = AdversaryKind::Crash;
  CHECK(run_campaign(sc, 0).summary.oracle_failures.empty());
}
