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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ssbc/adversary.hpp"
#include "ssbc/channel.hpp"
#include "ssbc/coin.hpp"
#include "ssbc/faultgen.hpp"
#include "ssbc/node.hpp"
#include "ssbc/types.hpp"
#include "ssbc/wire.hpp"

namespace ssbc {

enum class Verdict : std::uint8_t { Pass, Fail, NotApplicable };

std::string verdict_name(Verdict v);

/// Per-trial oracle outcomes. Verdicts are computed from the event log and
/// final states only; the protocol under test is never touched.
struct OracleVerdicts {
  Verdict bc_validity = Verdict::NotApplicable;
  Verdict bc_agreement = Verdict::NotApplicable;
  Verdict bc_termination = Verdict::NotApplicable;
  Verdict bv_validity = Verdict::NotApplicable;
  Verdict bv_uniformity = Verdict::NotApplicable;
  Verdict bv_termination = Verdict::NotApplicable;
  Verdict resolved_within_one_round = Verdict::NotApplicable;
  Verdict converged_within_o_m = Verdict::NotApplicable;
  Verdict singleton_agreement = Verdict::NotApplicable;
  Verdict unanimity_persistence = Verdict::NotApplicable;
  Verdict decision_stability = Verdict::NotApplicable;
  std::string counterexample;

  bool any_failure() const;
  bool safety_failure() const {
    return bc_validity == Verdict::Fail || bc_agreement == Verdict::Fail;
  }
};

/// Everything one trial needs. Derived from a Scenario plus a trial index.
struct TrialParams {
  SystemConfig cfg;
  FaultConfig faults;
  ChannelParams channel;
  std::vector<Bin> proposals;
  std::int64_t inject_at = -1;  // event index of the transient fault, -1 = none
  CorruptionSpec corruption;
  std::uint64_t step_budget = 1'000'000;
  std::uint32_t confirm_window = 0;       // 0 = default 96*n events
  std::uint32_t convergence_factor = 4;   // c in the c*M convergence bound
  std::uint64_t scenario_hash = 0;
};

struct TrialReport {
  std::uint64_t seed = 0;
  std::vector<Result> results;
  std::vector<std::int32_t> decision_round;  // node-local r at first decision, -1 if none
  std::vector<std::uint32_t> final_round;
  std::uint64_t async_rounds_at_last_decision = 0;
  std::uint64_t async_rounds_completed = 0;
  std::uint64_t recovery_rounds_to_converged = 0;
  std::uint64_t events = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t malformed_dropped = 0;
  bool liveness_budget_exhausted = false;
  bool any_transient_error = false;
  FootprintBits footprint;
  OracleVerdicts verdicts;
};

/// BV-broadcast event log entry (Definition of the broadcast/delivery
/// instrumentation; rounds 1..M only).
struct BvEvent {
  enum class Kind : std::uint8_t { Broadcast, Delivered, DeliveredStrong };
  std::uint32_t node = 0;
  std::uint32_t rnd = 0;
  Bin value = 0;
  Kind kind = Kind::Broadcast;
  std::uint64_t event_index = 0;
};

/// Tracks which correct nodes started/ended each numbered iteration and
/// which request/ack round trips landed, per the asynchronous-round
/// definition. Rounds a node jumped over after deciding are vacuous.
class AsyncRoundLedger {
 public:
  AsyncRoundLedger() = default;
  AsyncRoundLedger(std::uint32_t n, std::uint32_t rounds, std::vector<bool> faulty);

  void mark_started(std::uint32_t node, std::uint32_t rnd);
  void mark_ended(std::uint32_t node, std::uint32_t rnd);
  void mark_skipped(std::uint32_t node, std::uint32_t from_exclusive, std::uint32_t to_exclusive);
  void mark_request_arrival(std::uint32_t sender, std::uint32_t rnd, std::uint32_t receiver);
  void mark_ack_arrival(std::uint32_t replier, std::uint32_t rnd, std::uint32_t receiver);

  bool round_complete(std::uint32_t rnd) const;
  std::uint64_t completed_prefix() const;
  bool participated(std::uint32_t node, std::uint32_t rnd) const;
  /// True when every correct node ran iteration rnd start to end.
  bool fully_traversed(std::uint32_t rnd) const;

 private:
  std::size_t pair_index(std::uint32_t a, std::uint32_t b) const;

  std::uint32_t n_ = 0;
  std::uint32_t rounds_ = 0;
  std::vector<bool> faulty_;
  std::vector<std::uint8_t> started_, ended_, skipped_;
  std::vector<std::uint8_t> req_arrived_, ack_arrived_;
};

/// Deterministic single-trial executor: one event per step, chosen by a
/// seeded scheduler under the fairness contract.
class World {
 public:
  World(const TrialParams& params, std::uint64_t trial_seed, std::string* trace_sink = nullptr);
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  void propose_all();
  /// Executes exactly one event. False when nothing is enabled.
  bool step();
  TrialReport run();

  NodeState& node(std::uint32_t i) { return nodes_[i]; }
  const NodeState& node(std::uint32_t i) const { return nodes_[i]; }
  Network& network() { return net_; }
  const CoinSchedule& coin() const { return coin_; }
  const AdversaryView& adversary_view() const { return view_; }
  std::uint64_t events() const { return events_; }
  bool correct(std::uint32_t i) const { return !faulty_[i]; }
  const std::vector<BvEvent>& bv_log() const { return bv_log_; }
  const AsyncRoundLedger& async_ledger() const { return ledger_; }

 private:
  void activate(std::uint32_t i);
  void activate_merged(std::uint32_t i);
  void activate_bounded(std::uint32_t i);
  void broadcast(std::uint32_t src, const WireMessage& wire);
  void route(std::uint32_t src, std::uint32_t dst, const WireMessage& wire);
  bool deliver();
  void apply_injection();
  void record_bv_reception(std::uint32_t i, std::uint32_t rnd, std::uint32_t src, BinSet est);
  void log_bv_broadcast(std::uint32_t i, std::uint32_t rnd);
  void note_iteration_closed(std::uint32_t i, std::uint32_t rnd_open);
  void refresh_result(std::uint32_t i);
  void refresh_recovery(std::uint32_t i_completed_iteration);
  void maybe_establish_unanimity(std::uint32_t r);
  bool all_correct_terminal() const;

  void finalize_report(TrialReport& report, bool budget_exhausted);
  void check_bc_oracles(OracleVerdicts& v) const;
  void check_bv_oracles(OracleVerdicts& v) const;
  void check_stabilization(OracleVerdicts& v) const;

  TrialParams params_;
  SystemConfig cfg_;
  std::uint64_t seed_;
  CoinSchedule coin_;
  std::vector<NodeState> nodes_;
  Network net_;
  std::vector<bool> faulty_;
  AdversaryView view_;
  AdversaryCoinView coin_view_;
  Rng sched_rng_;
  std::string* trace_ = nullptr;

  std::uint64_t events_ = 0;
  std::uint64_t deliveries_ = 0;
  std::uint64_t malformed_ = 0;
  std::uint32_t max_correct_round_ = 0;
  std::uint32_t activation_round_ = 0;  // round of the in-progress activation
  bool result_changed_ = false;
  bool injected_ = false;
  std::uint64_t injection_event_ = 0;
  std::vector<std::uint64_t> iteration_started_at_;

  // Per-node result tracking.
  std::vector<Result> last_result_;
  std::vector<std::int32_t> decision_round_;
  std::vector<std::uint64_t> decision_event_;
  std::uint64_t last_decision_event_ = 0;
  std::uint64_t async_at_last_decision_ = 0;
  std::vector<std::uint64_t> last_activated_;

  // BV instrumentation (rounds 1..M, correct nodes only). Receptions are
  // recorded append-only here because the protocol reuses its own table
  // slot for the next-round estimate, losing reception history.
  std::vector<BvEvent> bv_log_;
  std::vector<std::vector<BinSet>> bv_recv_;               // [node][rnd*n+src]
  std::vector<std::vector<std::uint8_t>> bv_delivered_;    // t+1 crossings ever
  std::vector<std::vector<std::uint8_t>> bv_strong_;       // 2t+1 crossings ever
  std::vector<std::vector<std::uint8_t>> bv_broadcast_;
  std::vector<std::vector<std::uint8_t>> bv_delivered_at_injection_;
  std::vector<std::vector<std::uint64_t>> round_started_at_;  // event of first start
  std::vector<std::vector<std::uint64_t>> round_closed_at_;  // event of close, max() = open
  bool bv_termination_violated_ = false;
  std::string bv_termination_note_;

  AsyncRoundLedger ledger_;

  // Consistency instrumentation, scoped to the pre-injection segment.
  std::vector<std::int8_t> singleton_choice_;     // per round: -1 unseen, else value
  bool singleton_conflict_ = false;
  std::vector<std::int8_t> unanimity_value_;      // per round: -1 none
  std::vector<std::vector<std::int8_t>> entry_snapshot_;  // est[r-1] singleton at round entry
  bool unanimity_violated_ = false;
  bool stability_violated_ = false;

  // Recovery accounting (post-injection asynchronous rounds).
  struct RecoveryState {
    bool iter_done = false;
    std::vector<std::uint8_t> req_done;  // per peer
    std::vector<std::uint8_t> ack_done;
  };
  std::vector<RecoveryState> recovery_;
  std::uint64_t recovery_rounds_ = 0;
  bool resolved_after_first_recovery_round_ = false;
  bool recovery_round_one_seen_ = false;
  std::uint64_t recovery_rounds_at_convergence_ = 0;
  bool converged_recorded_ = false;
};

/// Runs one full trial from scenario-derived parameters.
TrialReport run_trial(const TrialParams& params, std::uint64_t trial_seed,
                      std::string* trace_sink = nullptr);

}  // namespace ssbc
