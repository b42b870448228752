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

#include "ssbc/campaign.hpp"
#include "ssbc/engine.hpp"
#include "ssbc/scenario.hpp"

using namespace ssbc;

namespace {

Scenario base_scenario() {
  Scenario sc;
  sc.cfg.n = 4;
  sc.cfg.t = 1;
  sc.cfg.m_rounds = 12;
  sc.cfg.variant = Variant::StabilizingSilent;
  sc.proposal_rule = ProposalRule::Unanimous1;
  sc.channel.drop_probability = 0.05;
  sc.channel.dup_probability = 0.01;
  sc.trials = 1;
  sc.base_seed = 1;
  return sc;
}

}  // namespace

TEST_CASE("the first node activation after propose opens round one") {
  Scenario sc = base_scenario();
  const TrialParams params = sc.trial_params(3);
  World world(params, 3);
  world.propose_all();
  for (std::uint32_t i = 0; i < 4; ++i) {
    CHECK(world.node(i).is_active());
    CHECK(world.node(i).round() == 0);
  }
  // Step until the first activation fires; no node can be past round 1.
  for (int k = 0; k < 8; ++k) world.step();
  bool some_round_one = false;
  for (std::uint32_t i = 0; i < 4; ++i) {
    CHECK(world.node(i).round() <= 1);
    if (world.node(i).round() == 1) some_round_one = true;
  }
  CHECK(some_round_one);
}

TEST_CASE("request deliveries enqueue the ack on the reverse channel") {
  Scenario sc = base_scenario();
  sc.channel.drop_probability = 0;
  sc.channel.dup_probability = 0;
  const TrialParams params = sc.trial_params(7);
  World world(params, 7);
  world.propose_all();
  // Run until some request crosses; then its reverse channel carries a
  // non-requesting record.
  bool saw_ack = false;
  for (int k = 0; k < 600 && !saw_ack; ++k) {
    world.step();
    for (std::uint32_t s = 0; s < 4 && !saw_ack; ++s)
      for (std::uint32_t d = 0; d < 4 && !saw_ack; ++d) {
        if (s == d) continue;
        for (const auto& entry : world.network().channel(s, d).queue())
          if (!entry.msg.ack_req) saw_ack = true;
      }
  }
  CHECK(saw_ack);
}

TEST_CASE("fault-free unanimous run decides at the first matching coin round") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull, 15ull, 16ull}) {
    Scenario sc = base_scenario();
    // The plain stabilizing variant keeps round counters sequential, so the
    // hand oracle pins the exact decision round of every node.
    sc.cfg.variant = Variant::Stabilizing;
    const TrialParams params = sc.trial_params(seed);
    const TrialReport report = run_trial(params, seed);
    // Independent oracle: with unanimous proposals of 1 the protocol can
    // only decide in the first round whose coin bit is 1.
    const CoinSchedule coin(derive_seed(seed, 1));
    std::int32_t expected = -1;
    for (std::uint32_t r = 1; r <= sc.cfg.m_rounds; ++r)
      if (coin.bit(r) == 1) {
        expected = static_cast<std::int32_t>(r);
        break;
      }
    REQUIRE(expected != -1);
    for (std::uint32_t i = 0; i < 4; ++i) {
      CHECK(report.results[i] == Result::decided(1));
      CHECK(report.decision_round[i] == expected);
    }
    CHECK_FALSE(report.verdicts.any_failure());
  }
}

TEST_CASE("crash adversary with unanimous proposals keeps validity") {
  Scenario sc = base_scenario();
  sc.proposal_rule = ProposalRule::Unanimous0;
  sc.faults.faulty = {3};
  sc.faults.strategy.kind = AdversaryKind::Crash;
  sc.trials = 30;
  sc.base_seed = 400;
  const CampaignResult result = run_campaign(sc, 2);
  for (const auto& r : result.reports) {
    for (std::uint32_t i = 0; i < 3; ++i) CHECK(r.results[i] == Result::decided(0));
    CHECK(r.verdicts.bc_validity == Verdict::Pass);
    CHECK(r.verdicts.bc_agreement == Verdict::Pass);
    CHECK(r.verdicts.bc_termination == Verdict::Pass);
  }
}

TEST_CASE("campaign reruns are byte identical") {
  Scenario sc = base_scenario();
  sc.proposal_rule = ProposalRule::Split;
  sc.faults.faulty = {3};
  sc.faults.strategy.kind = AdversaryKind::SplitVote;
  sc.trials = 40;
  sc.base_seed = 900;
  const CampaignResult a = run_campaign(sc, 4, true);
  const CampaignResult b = run_campaign(sc, 2, true);  // different pool size
  CHECK(report_jsonl(a) == report_jsonl(b));
  CHECK(a.trace == b.trace);
  CHECK(!a.trace.empty());
}

TEST_CASE("async ledger counts started, ended, and exchanged rounds") {
  AsyncRoundLedger ledger(3, 6, {false, false, true});
  CHECK_FALSE(ledger.round_complete(1));
  ledger.mark_started(0, 1);
  ledger.mark_started(1, 1);
  ledger.mark_ended(0, 1);
  ledger.mark_ended(1, 1);
  CHECK_FALSE(ledger.round_complete(1));  // round trips missing
  ledger.mark_request_arrival(0, 1, 1);
  ledger.mark_request_arrival(1, 1, 0);
  ledger.mark_ack_arrival(1, 1, 0);
  CHECK_FALSE(ledger.round_complete(1));
  ledger.mark_ack_arrival(0, 1, 1);
  CHECK(ledger.round_complete(1));  // the faulty node is never required
  CHECK(ledger.completed_prefix() == 1);
}

TEST_CASE("skipped rounds are vacuously complete, empty rounds are not") {
  AsyncRoundLedger ledger(2, 6, {false, false});
  ledger.mark_started(0, 1);
  ledger.mark_ended(0, 1);
  ledger.mark_request_arrival(0, 1, 1);
  ledger.mark_ack_arrival(1, 1, 0);
  ledger.mark_skipped(1, 0, 2);  // node 1 jumped over round 1
  CHECK(ledger.round_complete(1));
  CHECK_FALSE(ledger.round_complete(2));  // nobody ran round 2
  ledger.mark_skipped(0, 1, 3);
  ledger.mark_skipped(1, 1, 3);
  CHECK_FALSE(ledger.round_complete(2));
}

TEST_CASE("mid-run corruption trials recover and converge") {
  Scenario sc = base_scenario();
  sc.cfg.m_rounds = 15;
  sc.proposal_rule = ProposalRule::Split;
  sc.inject_at = 120;
  sc.corruption.intensity = 1.0;
  sc.trials = 25;
  sc.base_seed = 7000;
  const CampaignResult result = run_campaign(sc, 4);
  for (const auto& r : result.reports) {
    CHECK(r.verdicts.resolved_within_one_round == Verdict::Pass);
    CHECK(r.verdicts.converged_within_o_m == Verdict::Pass);
    CHECK_FALSE(r.liveness_budget_exhausted);
  }
}

TEST_CASE("stabilization verdicts are not applicable without injection") {
  Scenario sc = base_scenario();
  sc.trials = 2;
  const CampaignResult result = run_campaign(sc, 1);
  for (const auto& r : result.reports) {
    CHECK(r.verdicts.resolved_within_one_round == Verdict::NotApplicable);
    CHECK(r.verdicts.converged_within_o_m == Verdict::NotApplicable);
  }
}

TEST_CASE("scenario parser applies documented defaults") {
  const Scenario sc = parse_scenario_text("nodes = 4\nt = 1\n");
  CHECK(sc.trials == 1000);
  CHECK(sc.channel.capacity == 32);
  CHECK(sc.channel.drop_probability == doctest::Approx(0.05));
  CHECK(sc.channel.dup_probability == doctest::Approx(0.01));
  CHECK(sc.channel.fairness_k == 0);  // filled as 8n^2 by the network
  Network net(sc.cfg.n, sc.channel, 1);
  CHECK(net.params().fairness_k == 8 * 4 * 4);
}

TEST_CASE("scenario parser rejects a broken resilience bound") {
  CHECK_THROWS_WITH_AS(parse_scenario_text("nodes = 3\nt = 1\n"),
                       doctest::Contains("3t+1"), std::invalid_argument);
}

TEST_CASE("scenario parser rejects unknown adversaries with the valid list") {
  CHECK_THROWS_WITH_AS(parse_scenario_text("adversary = gremlin\n"),
                       doctest::Contains("valid kinds"), std::invalid_argument);
}

TEST_CASE("scenario parser accepts explicit proposal lists and faulty ids") {
  const Scenario sc = parse_scenario_text(
      "nodes = 4\nt = 1\nproposals = 0,1,0,1\nfaulty_ids = 2\nadversary = spoiler\n");
  CHECK(sc.proposal_rule == ProposalRule::Explicit);
  CHECK(sc.explicit_proposals == std::vector<Bin>{0, 1, 0, 1});
  CHECK(sc.faults.faulty == std::vector<std::uint32_t>{2});
  const TrialParams params = sc.trial_params(1);
  CHECK(params.proposals == std::vector<Bin>{0, 1, 0, 1});
}

TEST_CASE("scenario parser rejects unknown keys and bad lines") {
  CHECK_THROWS_AS(parse_scenario_text("martian = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_text("nodes\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_text("drop = banana\n"), std::invalid_argument);
}

TEST_CASE("summary histogram counts add up to the trial count") {
  Scenario sc = base_scenario();
  sc.proposal_rule = ProposalRule::Random;
  sc.trials = 60;
  sc.base_seed = 123;
  const CampaignResult result = run_campaign(sc, 4);
  std::uint64_t total = 0;
  for (const auto& [round, count] : result.summary.decision_round_hist) total += count;
  CHECK(total == sc.trials);
  CHECK(result.reports.size() == sc.trials);
}

TEST_CASE("report emission writes trial records plus summary and table") {
  Scenario sc = base_scenario();
  sc.trials = 3;
  const CampaignResult result = run_campaign(sc, 1);
  const std::string jsonl = report_jsonl(result);
  int lines = 0;
  for (char c : jsonl) lines += c == '\n';
  CHECK(lines == 4);  // three trials plus one summary record
  CHECK(report_table(result).find("campaign:") != std::string::npos);
}

TEST_CASE("trial reports carry message accounting") {
  Scenario sc = base_scenario();
  sc.trials = 1;
  const CampaignResult result = run_campaign(sc, 1);
  const TrialReport& r = result.reports[0];
  CHECK(r.messages_sent > 0);
  CHECK(r.bytes_sent == r.messages_sent * WireMessage::kBytes);
  CHECK(r.events > 0);
  CHECK(r.footprint.total_bits > 0);
}
