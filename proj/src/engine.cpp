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
#include "ssbc/engine.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace ssbc {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "n/a";
  }
}

bool OracleVerdicts::any_failure() const {
  for (Verdict v : {bc_validity, bc_agreement, bc_termination, bv_validity, bv_uniformity,
                    bv_termination, resolved_within_one_round, converged_within_o_m,
                    singleton_agreement, unanimity_persistence, decision_stability})
    if (v == Verdict::Fail) return true;
  return false;
}

AsyncRoundLedger::AsyncRoundLedger(std::uint32_t n, std::uint32_t rounds,
                                   std::vector<bool> faulty)
    : n_(n), rounds_(rounds), faulty_(std::move(faulty)) {
  started_.assign(static_cast<std::size_t>(rounds) * n, 0);
  ended_.assign(static_cast<std::size_t>(rounds) * n, 0);
  skipped_.assign(static_cast<std::size_t>(rounds) * n, 0);
  req_arrived_.assign(static_cast<std::size_t>(rounds) * n * n, 0);
  ack_arrived_.assign(static_cast<std::size_t>(rounds) * n * n, 0);
}

void AsyncRoundLedger::mark_started(std::uint32_t node, std::uint32_t rnd) {
  if (rnd < rounds_) started_[static_cast<std::size_t>(rnd) * n_ + node] = 1;
}

void AsyncRoundLedger::mark_ended(std::uint32_t node, std::uint32_t rnd) {
  if (rnd < rounds_) ended_[static_cast<std::size_t>(rnd) * n_ + node] = 1;
}

void AsyncRoundLedger::mark_skipped(std::uint32_t node, std::uint32_t from_exclusive,
                                    std::uint32_t to_exclusive) {
  for (std::uint32_t rnd = from_exclusive + 1; rnd < to_exclusive && rnd < rounds_; ++rnd)
    skipped_[static_cast<std::size_t>(rnd) * n_ + node] = 1;
}

void AsyncRoundLedger::mark_request_arrival(std::uint32_t sender, std::uint32_t rnd,
                                            std::uint32_t receiver) {
  if (rnd < rounds_)
    req_arrived_[(static_cast<std::size_t>(rnd) * n_ + sender) * n_ + receiver] = 1;
}

void AsyncRoundLedger::mark_ack_arrival(std::uint32_t replier, std::uint32_t rnd,
                                        std::uint32_t receiver) {
  if (rnd < rounds_)
    ack_arrived_[(static_cast<std::size_t>(rnd) * n_ + replier) * n_ + receiver] = 1;
}

bool AsyncRoundLedger::round_complete(std::uint32_t rnd) const {
  const std::size_t base = static_cast<std::size_t>(rnd) * n_;
  bool any_participant = false;
  for (std::uint32_t i = 0; i < n_; ++i) {
    if (faulty_[i]) continue;
    const bool participates = started_[base + i] != 0;
    if (!participates && !skipped_[base + i]) return false;
    if (participates && !ended_[base + i]) return false;
    if (!participates) continue;
    any_participant = true;
    // Every request this participant broadcast must have landed, and the
    // matching ack must have come back, for every correct peer.
    for (std::uint32_t j = 0; j < n_; ++j) {
      if (j == i || faulty_[j]) continue;
      if (!req_arrived_[(base + i) * n_ + j]) return false;
      if (!ack_arrived_[(base + j) * n_ + i]) return false;
    }
  }
  // A round nobody ran never happened; it cannot count as elapsed.
  return any_participant;
}

bool AsyncRoundLedger::participated(std::uint32_t node, std::uint32_t rnd) const {
  if (rnd >= rounds_) return false;
  return started_[static_cast<std::size_t>(rnd) * n_ + node] != 0;
}

bool AsyncRoundLedger::fully_traversed(std::uint32_t rnd) const {
  if (rnd >= rounds_) return false;
  const std::size_t base = static_cast<std::size_t>(rnd) * n_;
  for (std::uint32_t i = 0; i < n_; ++i) {
    if (faulty_[i]) continue;
    if (!started_[base + i] || !ended_[base + i]) return false;
  }
  return true;
}

std::uint64_t AsyncRoundLedger::completed_prefix() const {
  std::uint64_t done = 0;
  for (std::uint32_t rnd = 1; rnd < rounds_; ++rnd) {
    if (!round_complete(rnd)) break;
    ++done;
  }
  return done;
}

namespace {

constexpr std::int8_t kNotEntered = -2;
constexpr std::int8_t kNoSingleton = -1;

}  // namespace

World::World(const TrialParams& params, std::uint64_t trial_seed, std::string* trace_sink)
    : params_(params),
      cfg_(params.cfg),
      seed_(trial_seed),
      coin_(derive_seed(trial_seed, 1)),
      net_(params.cfg.n, params.channel, derive_seed(trial_seed, 3)),
      faulty_(params.faults.faulty_mask(params.cfg.n)),
      view_(params.cfg.n, derive_seed(trial_seed, 4) ^ params.faults.strategy.garbage_seed),
      coin_view_(coin_, max_correct_round_),
      sched_rng_(derive_seed(trial_seed, 2)),
      trace_(trace_sink) {
  cfg_.validate();
  params_.faults.validate(cfg_);
  if (params_.proposals.size() != cfg_.n)
    throw std::invalid_argument("engine: one proposal per node required");
  nodes_.reserve(cfg_.n);
  for (std::uint32_t i = 0; i < cfg_.n; ++i) nodes_.emplace_back(cfg_, i);

  const std::uint32_t rows = cfg_.m_rounds + 2;
  last_result_.assign(cfg_.n, Result::undecided());
  decision_round_.assign(cfg_.n, -1);
  decision_event_.assign(cfg_.n, 0);
  last_activated_.assign(cfg_.n, 0);
  iteration_started_at_.assign(cfg_.n, 0);
  bv_recv_.assign(cfg_.n, std::vector<BinSet>(static_cast<std::size_t>(rows) * cfg_.n));
  round_started_at_.assign(cfg_.n, std::vector<std::uint64_t>(rows, UINT64_MAX));
  round_closed_at_.assign(cfg_.n, std::vector<std::uint64_t>(rows, UINT64_MAX));
  bv_delivered_.assign(cfg_.n, std::vector<std::uint8_t>(rows, 0));
  bv_strong_.assign(cfg_.n, std::vector<std::uint8_t>(rows, 0));
  bv_broadcast_.assign(cfg_.n, std::vector<std::uint8_t>(rows, 0));
  ledger_ = AsyncRoundLedger(cfg_.n, rows, faulty_);
  singleton_choice_.assign(rows, kNoSingleton);
  unanimity_value_.assign(rows, kNoSingleton);
  entry_snapshot_.assign(cfg_.n, std::vector<std::int8_t>(rows, kNotEntered));
  recovery_.assign(cfg_.n, RecoveryState{false, std::vector<std::uint8_t>(cfg_.n, 0),
                                         std::vector<std::uint8_t>(cfg_.n, 0)});
  if (trace_) {
    char header[64];
    std::snprintf(header, sizeof(header), "# scenario=%016llx seed=%016llx\n",
                  static_cast<unsigned long long>(params_.scenario_hash),
                  static_cast<unsigned long long>(trial_seed));
    trace_->append(header);
  }
}

void World::propose_all() {
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    nodes_[i].propose(params_.proposals[i]);
    refresh_result(i);
  }
}

bool World::all_correct_terminal() const {
  for (std::uint32_t i = 0; i < cfg_.n; ++i)
    if (!faulty_[i] && !last_result_[i].terminal()) return false;
  return true;
}

void World::refresh_result(std::uint32_t i) {
  if (faulty_[i]) return;
  const Result raw = nodes_[i].result();
  const Result prev = last_result_[i];
  // The transient-error condition is a sampled predicate that can flicker
  // between loop passes; the trial outcome latches it until a decision
  // arrives. Decisions latch outright.
  Result now = prev;
  if (raw.kind == Result::Kind::Decided) {
    now = raw;
  } else if (raw.kind == Result::Kind::TransientError &&
             prev.kind != Result::Kind::Decided) {
    now = raw;
  }
  if (now == prev) return;
  if (!injected_ && prev.kind == Result::Kind::Decided) stability_violated_ = true;
  if (now.kind == Result::Kind::Decided && prev.kind != Result::Kind::Decided) {
    decision_round_[i] = static_cast<std::int32_t>(
        activation_round_ != 0 ? activation_round_ : nodes_[i].round());
    decision_event_[i] = events_;
    last_decision_event_ = events_;
    async_at_last_decision_ = ledger_.completed_prefix();
  }
  last_result_[i] = now;
  result_changed_ = true;
  if (injected_) {
    if (all_correct_terminal()) {
      if (!converged_recorded_) {
        converged_recorded_ = true;
        recovery_rounds_at_convergence_ = recovery_rounds_ + 1;
      }
    } else {
      converged_recorded_ = false;
    }
  }
}

void World::log_bv_broadcast(std::uint32_t i, std::uint32_t rnd) {
  // Every value inside the estimate record a correct node offers for round
  // rnd counts as BV-broadcast by it, whether carried by the loop broadcast
  // or re-offered through an ack.
  if (injected_ || rnd < 1 || rnd > cfg_.m_rounds) return;
  const BinSet basis = nodes_[i].est_at(rnd - 1, i);
  for (Bin v : {Bin{0}, Bin{1}}) {
    if (!basis.contains(v)) continue;
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << v);
    if (bv_broadcast_[i][rnd] & bit) continue;
    bv_broadcast_[i][rnd] |= bit;
    bv_log_.push_back({i, rnd, v, BvEvent::Kind::Broadcast, events_});
  }
}

void World::record_bv_reception(std::uint32_t i, std::uint32_t rnd, std::uint32_t src,
                                BinSet est) {
  if (injected_ || rnd < 1 || rnd > cfg_.m_rounds || est.empty()) return;
  BinSet& slot = bv_recv_[i][static_cast<std::size_t>(rnd) * cfg_.n + src];
  if (est.subset_of(slot)) return;
  slot.merge(est);
  std::uint32_t count0 = 0;
  std::uint32_t count1 = 0;
  const std::size_t base = static_cast<std::size_t>(rnd) * cfg_.n;
  for (std::uint32_t j = 0; j < cfg_.n; ++j) {
    count0 += bv_recv_[i][base + j].contains(0);
    count1 += bv_recv_[i][base + j].contains(1);
  }
  const std::uint32_t counts[2] = {count0, count1};
  for (Bin v : {Bin{0}, Bin{1}}) {
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << v);
    if (counts[v] >= cfg_.echo_threshold() && !(bv_delivered_[i][rnd] & bit)) {
      bv_delivered_[i][rnd] |= bit;
      bv_log_.push_back({i, rnd, v, BvEvent::Kind::Delivered, events_});
    }
    if (counts[v] >= cfg_.keep_threshold() && !(bv_strong_[i][rnd] & bit)) {
      bv_strong_[i][rnd] |= bit;
      bv_log_.push_back({i, rnd, v, BvEvent::Kind::DeliveredStrong, events_});
    }
  }
}

void World::route(std::uint32_t src, std::uint32_t dst, const WireMessage& wire) {
  WireMessage msg = wire;
  msg.sender = static_cast<std::uint16_t>(src);
  msg.dst = static_cast<std::uint16_t>(dst);
  if (faulty_[src] && params_.faults.strategy.kind != AdversaryKind::None) {
    const auto outputs = apply_adversary(params_.faults.strategy, params_.faults, cfg_, src,
                                         dst, msg, view_, coin_view_);
    for (const auto& out : outputs) net_.send(src, dst, out.msg, events_, out.extra_delay);
    return;
  }
  net_.send(src, dst, msg, events_, 0);
  if (faulty_[dst]) view_.observe(msg);
}

void World::broadcast(std::uint32_t src, const WireMessage& wire) {
  for (std::uint32_t dst = 0; dst < cfg_.n; ++dst)
    if (dst != src) route(src, dst, wire);
}

void World::note_iteration_closed(std::uint32_t i, std::uint32_t rnd_open) {
  if (rnd_open < round_closed_at_[i].size() &&
      round_closed_at_[i][rnd_open] == UINT64_MAX)
    round_closed_at_[i][rnd_open] = events_;
  if (!injected_ && rnd_open >= 1 && rnd_open <= cfg_.m_rounds &&
      nodes_[i].bin_values(rnd_open, cfg_.echo_threshold()).empty() &&
      !bv_termination_violated_) {
    bv_termination_violated_ = true;
    bv_termination_note_ = "node " + std::to_string(i) + " closed round " +
                           std::to_string(rnd_open) + " with empty binValues";
  }
  if (!injected_) {
    // Unanimity persistence: once every correct node entered a round with
    // the same singleton estimate, every later closed round keeps it.
    for (std::uint32_t r0 = 1; r0 <= rnd_open && r0 < unanimity_value_.size(); ++r0) {
      const std::int8_t v = unanimity_value_[r0];
      if (v < 0) continue;
      if (rnd_open <= cfg_.m_rounds &&
          nodes_[i].est_at(rnd_open, i) != BinSet::of(static_cast<Bin>(v)))
        unanimity_violated_ = true;
      break;
    }
  }
  if (injected_ && iteration_started_at_[i] > injection_event_) {
    recovery_[i].iter_done = true;
    refresh_recovery(i);
  }
}

void World::refresh_recovery(std::uint32_t) {
  // A recovery round completes when every correct node finished a full
  // iteration inside the current fragment and every correct ordered pair
  // exchanged at least one request and its ack.
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    if (faulty_[i]) continue;
    if (!recovery_[i].iter_done) return;
    for (std::uint32_t j = 0; j < cfg_.n; ++j) {
      if (j == i || faulty_[j]) continue;
      if (!recovery_[i].req_done[j] || !recovery_[i].ack_done[j]) return;
    }
  }
  ++recovery_rounds_;
  if (!recovery_round_one_seen_) {
    recovery_round_one_seen_ = true;
    resolved_after_first_recovery_round_ = true;
    for (std::uint32_t i = 0; i < cfg_.n; ++i)
      if (!faulty_[i] && !nodes_[i].resolved()) resolved_after_first_recovery_round_ = false;
  }
  for (auto& r : recovery_) {
    r.iter_done = false;
    std::fill(r.req_done.begin(), r.req_done.end(), 0);
    std::fill(r.ack_done.begin(), r.ack_done.end(), 0);
  }
}

void World::activate_merged(std::uint32_t i) {
  NodeState& nd = nodes_[i];
  if (!nd.iteration_open()) {
    nd.begin_iteration();
    const std::uint32_t r = nd.round();
    iteration_started_at_[i] = events_;
    if (!faulty_[i]) {
      ledger_.mark_started(i, r);
      if (round_started_at_[i][r] == UINT64_MAX) round_started_at_[i][r] = events_;
      if (!injected_ && entry_snapshot_[i][r] == kNotEntered) {
        const BinSet prev = nd.est_at(r - 1, i);
        entry_snapshot_[i][r] =
            prev.is_singleton() ? static_cast<std::int8_t>(prev.sole()) : kNoSingleton;
        maybe_establish_unanimity(r);
      }
      max_correct_round_ = std::max(max_correct_round_, r);
    }
  }
  const std::uint32_t r = nd.round();
  activation_round_ = r;
  const EstMessage payload = nd.broadcast_payload();
  if (!faulty_[i]) log_bv_broadcast(i, r);
  broadcast(i, WireMessage::from_est(static_cast<std::uint16_t>(i), 0, payload));
  nd.apply_self(payload);
  if (!faulty_[i]) record_bv_reception(i, r, i, payload.est);
  if (nd.round_phase_complete()) {
    // Sample the result at the loop exit: the transient-error condition is
    // only observable here before try_to_decide rewrites the round slot.
    refresh_result(i);
    const BinSet vals = nd.info_result();
    if (!faulty_[i] && !injected_ && vals.is_singleton()) {
      const std::int8_t prior = singleton_choice_[r];
      if (prior == kNoSingleton)
        singleton_choice_[r] = static_cast<std::int8_t>(vals.sole());
      else if (prior != static_cast<std::int8_t>(vals.sole()))
        singleton_conflict_ = true;
    }
    nd.try_to_decide(vals, coin_);
    if (cfg_.variant == Variant::StabilizingSilent) nd.silent_extension_check();
    const std::uint32_t r_after = nd.round();
    nd.close_iteration();
    if (!faulty_[i]) {
      ledger_.mark_ended(i, r);
      if (r_after > r) ledger_.mark_skipped(i, r, r_after);
      note_iteration_closed(i, r);
    }
  }
}

void World::activate_bounded(std::uint32_t i) {
  NodeState& nd = nodes_[i];
  if (!nd.iteration_open()) {
    nd.begin_iteration();
    iteration_started_at_[i] = events_;
    if (!faulty_[i]) {
      ledger_.mark_started(i, nd.round());
      if (round_started_at_[i][nd.round()] == UINT64_MAX)
        round_started_at_[i][nd.round()] = events_;
      max_correct_round_ = std::max(max_correct_round_, nd.round());
    }
  }
  const std::uint32_t r = nd.round();
  activation_round_ = r;
  if (nd.phase() == NodeState::Phase::Est) {
    const EstMessage payload = nd.broadcast_payload();
    if (!faulty_[i]) log_bv_broadcast(i, r);
    broadcast(i, WireMessage::from_est(static_cast<std::uint16_t>(i), 0, payload));
    nd.apply_self(payload);
    if (!faulty_[i]) record_bv_reception(i, r, i, payload.est);
    nd.alg2_aux_refresh();
    if (nd.est_phase_complete()) nd.advance_to_aux_phase();
  } else {
    const AuxMessage payload = nd.aux_broadcast_payload();
    broadcast(i, WireMessage::from_aux(static_cast<std::uint16_t>(i), 0, payload));
    nd.apply_self(payload);
    if (nd.round_phase_complete()) {
      refresh_result(i);
      const BinSet vals = nd.info_result();
      if (!faulty_[i] && !injected_ && vals.is_singleton()) {
        const std::int8_t prior = singleton_choice_[r];
        if (prior == kNoSingleton)
          singleton_choice_[r] = static_cast<std::int8_t>(vals.sole());
        else if (prior != static_cast<std::int8_t>(vals.sole()))
          singleton_conflict_ = true;
      }
      nd.try_to_decide(vals, coin_);
      nd.close_iteration();
      if (!faulty_[i]) {
        ledger_.mark_ended(i, r);
        note_iteration_closed(i, r);
      }
    }
  }
}

void World::maybe_establish_unanimity(std::uint32_t r) {
  if (unanimity_value_[r] != kNoSingleton) return;
  std::int8_t common = kNotEntered;
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    if (faulty_[i]) continue;
    const std::int8_t snap = entry_snapshot_[i][r];
    if (snap == kNotEntered) return;  // someone has not entered this round yet
    if (snap == kNoSingleton) return;
    if (common == kNotEntered) common = snap;
    if (snap != common) return;
  }
  if (common >= 0) unanimity_value_[r] = common;
}

void World::activate(std::uint32_t i) {
  last_activated_[i] = events_;
  NodeState& nd = nodes_[i];
  if (!nd.is_active()) return;
  if (cfg_.variant == Variant::Bounded)
    activate_bounded(i);
  else
    activate_merged(i);
  refresh_result(i);
  activation_round_ = 0;
}

bool World::deliver() {
  auto d = net_.next_deliverable(sched_rng_, events_, faulty_);
  if (!d) return false;
  ++deliveries_;
  if (trace_) {
    trace_->append(d->msg.encode_hex());
    trace_->push_back('\n');
  }
  NodeState& nd = nodes_[d->dst];
  const bool correct_pair = !faulty_[d->src] && !faulty_[d->dst];
  if (d->msg.kind == MsgKind::Est) {
    const EstMessage m = d->msg.to_est();
    const auto handled = nd.on_est_message(d->src, m);
    if (!handled.accepted) {
      ++malformed_;
    } else {
      if (!faulty_[d->dst]) record_bv_reception(d->dst, m.rnd, d->src, m.est);
      if (correct_pair) {
        if (m.ack_req) {
          ledger_.mark_request_arrival(d->src, m.rnd, d->dst);
          if (injected_) recovery_[d->src].req_done[d->dst] = 1;
        } else {
          ledger_.mark_ack_arrival(d->src, m.rnd, d->dst);
          if (injected_) {
            recovery_[d->dst].ack_done[d->src] = 1;
            refresh_recovery(d->dst);
          }
        }
      }
      if (handled.reply) {
        // The ack retransmits the replier's previous-round estimate for the
        // requested round; that is a BV relay and must be logged as one.
        if (!faulty_[d->dst] && nd.round() >= m.rnd) log_bv_broadcast(d->dst, m.rnd);
        route(d->dst, d->src,
              WireMessage::from_est(static_cast<std::uint16_t>(d->dst),
                                    static_cast<std::uint16_t>(d->src), *handled.reply));
      }
    }
  } else {
    if (cfg_.variant != Variant::Bounded) {
      ++malformed_;  // AUX records have no meaning outside the bounded variant
    } else {
      const AuxMessage m = d->msg.to_aux();
      const auto handled = nd.on_aux_message(d->src, m);
      if (!handled.accepted) {
        ++malformed_;
      } else {
        if (correct_pair) {
          if (m.ack_req) {
            ledger_.mark_request_arrival(d->src, m.rnd, d->dst);
            if (injected_) recovery_[d->src].req_done[d->dst] = 1;
          } else {
            ledger_.mark_ack_arrival(d->src, m.rnd, d->dst);
            if (injected_) {
              recovery_[d->dst].ack_done[d->src] = 1;
              refresh_recovery(d->dst);
            }
          }
        }
        if (handled.reply)
          route(d->dst, d->src,
                WireMessage::from_aux(static_cast<std::uint16_t>(d->dst),
                                      static_cast<std::uint16_t>(d->src), *handled.reply));
      }
    }
  }
  refresh_result(d->dst);
  return true;
}

bool World::step() {
  result_changed_ = false;
  // Forced activation for a node starved past the aging bound.
  const std::uint64_t age_bound = 64ull * cfg_.n;
  std::uint32_t starved = cfg_.n;
  std::uint64_t worst_age = age_bound;
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    if (!nodes_[i].is_active()) continue;
    const std::uint64_t age = events_ - last_activated_[i];
    if (age >= worst_age) {
      worst_age = age;
      starved = i;
    }
  }
  if (starved < cfg_.n) {
    activate(starved);
    ++events_;
    return true;
  }

  std::array<std::uint32_t, 64> active{};
  std::uint32_t n_active = 0;
  for (std::uint32_t i = 0; i < cfg_.n && n_active < active.size(); ++i)
    if (nodes_[i].is_active()) active[n_active++] = i;
  std::uint32_t ready = 0;
  for (const auto& ch : net_.channels())
    if (ch.has_ready(events_)) ++ready;
  const std::uint64_t total = n_active + ready;
  if (total == 0) return false;
  const std::uint64_t pick = sched_rng_.next_below(total);
  if (pick < n_active) {
    activate(active[pick]);
  } else if (!deliver()) {
    return false;
  }
  ++events_;
  return true;
}

void World::apply_injection() {
  injected_ = true;
  injection_event_ = events_;
  CorruptionSpec spec = params_.corruption;
  spec.seed = derive_seed(seed_, 5) ^ spec.seed;
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    if (faulty_[i] || !spec.targets_node(i)) continue;
    corrupt_node(nodes_[i], spec);
    // The fault interrupts whatever the node was doing; it resumes at the
    // top of its do-forever loop with the scrambled state.
    nodes_[i].close_iteration();
  }
  corrupt_channels(net_, cfg_, spec, events_);
  bv_delivered_at_injection_ = bv_delivered_;
  max_correct_round_ = 0;
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    if (!faulty_[i]) max_correct_round_ = std::max(max_correct_round_, nodes_[i].round());
    last_result_[i] = faulty_[i] ? Result::undecided() : nodes_[i].result();
    if (last_result_[i].kind == Result::Kind::TransientError)
      last_result_[i] = nodes_[i].result();
  }
  // Scrambled states can land terminal outright; that counts as converged.
  if (all_correct_terminal()) {
    converged_recorded_ = true;
    recovery_rounds_at_convergence_ = 1;
  }
}

TrialReport World::run() {
  propose_all();
  const std::uint32_t confirm =
      params_.confirm_window != 0 ? params_.confirm_window : 96 * cfg_.n;
  bool budget_exhausted = false;
  std::uint64_t stable_since = 0;

  for (int cycle = 0; cycle < 3; ++cycle) {
    while (true) {
      if (!injected_ && params_.inject_at >= 0 &&
          events_ >= static_cast<std::uint64_t>(params_.inject_at))
        apply_injection();
      if (events_ >= params_.step_budget) {
        budget_exhausted = !all_correct_terminal();
        break;
      }
      if (!step()) break;
      if (result_changed_) stable_since = events_;
      // With an injection the trial must outlive the first recovery round,
      // or the stabilization oracles have nothing to judge.
      const bool recovery_settled = !injected_ || recovery_round_one_seen_;
      if (all_correct_terminal() && recovery_settled && events_ - stable_since >= confirm)
        break;
    }
    // Drain in-flight traffic so "eventually" oracles see a settled state.
    std::uint64_t drained = 0;
    while (drained < 50'000 && deliver()) {
      ++events_;
      ++drained;
    }
    if (all_correct_terminal() || budget_exhausted) break;
  }

  TrialReport report;
  finalize_report(report, budget_exhausted);
  return report;
}

void World::check_bc_oracles(OracleVerdicts& v) const {
  bool all_terminal = true;
  bool agreement = true;
  bool validity = true;
  std::optional<Bin> decided;
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    if (faulty_[i]) continue;
    const Result r = last_result_[i];
    if (!r.terminal()) all_terminal = false;
    if (r.kind == Result::Kind::Decided) {
      if (decided.has_value() && *decided != r.value) agreement = false;
      if (!decided.has_value()) decided = r.value;
      bool proposed_by_correct = false;
      for (std::uint32_t j = 0; j < cfg_.n; ++j)
        if (!faulty_[j] && params_.proposals[j] == r.value) proposed_by_correct = true;
      if (!proposed_by_correct) validity = false;
    }
  }
  v.bc_termination = all_terminal ? Verdict::Pass : Verdict::Fail;
  v.bc_agreement = agreement ? Verdict::Pass : Verdict::Fail;
  v.bc_validity = validity ? Verdict::Pass : Verdict::Fail;
  if (!agreement && v.counterexample.empty()) v.counterexample = "correct nodes decided both values";
  if (!validity && v.counterexample.empty()) v.counterexample = "decided value proposed by no correct node";
}

void World::check_bv_oracles(OracleVerdicts& v) const {
  // The BV task is specified for executions from a well-initialized state;
  // with a mid-run transient fault the instrumented segment ends at the
  // injection point (the logs stop there by construction).
  std::vector<std::array<std::uint64_t, 2>> earliest_broadcast(
      cfg_.m_rounds + 2, {UINT64_MAX, UINT64_MAX});
  for (const auto& e : bv_log_)
    if (e.kind == BvEvent::Kind::Broadcast)
      earliest_broadcast[e.rnd][e.value] = std::min(earliest_broadcast[e.rnd][e.value],
                                                    e.event_index);
  bool validity = true;
  for (const auto& e : bv_log_) {
    if (e.kind != BvEvent::Kind::Delivered) continue;
    if (earliest_broadcast[e.rnd][e.value] > e.event_index) {
      validity = false;
      if (v.counterexample.empty())
        v.counterexample = "BV-delivery of " + std::to_string(int(e.value)) + " in round " +
                           std::to_string(e.rnd) + " without a correct broadcast";
      break;
    }
  }
  const auto& final_masks = injected_ ? bv_delivered_at_injection_ : bv_delivered_;
  bool uniformity = true;
  for (const auto& e : bv_log_) {
    if (injected_) break;  // the fault truncates every eventuality obligation
    if (e.kind != BvEvent::Kind::DeliveredStrong) continue;
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << e.value);
    for (std::uint32_t j = 0; j < cfg_.n && uniformity; ++j) {
      if (faulty_[j]) continue;
      // The obligation binds a node that ran round rnd and still had it
      // open at the horizon; one that completed the round (or jumped it
      // after deciding) took what it needed and has no further claim. The
      // relays that make "eventually" true only run while peers stay in
      // the round, so this is the strongest form a finite execution can
      // guarantee. A node whose invocation ended in the transient error
      // has exhausted its round budget and holds no claims either.
      if (round_started_at_[j][e.rnd] == UINT64_MAX) continue;
      if (round_closed_at_[j][e.rnd] != UINT64_MAX) continue;
      if (last_result_[j].kind == Result::Kind::TransientError) continue;
      if (!(final_masks[j][e.rnd] & bit)) {
        uniformity = false;
        if (v.counterexample.empty())
          v.counterexample = "round " + std::to_string(e.rnd) + " value " +
                             std::to_string(int(e.value)) + " never delivered at node " +
                             std::to_string(j);
      }
    }
    if (!uniformity) break;
  }
  v.bv_validity = validity ? Verdict::Pass : Verdict::Fail;
  v.bv_uniformity = injected_ ? Verdict::NotApplicable
                              : (uniformity ? Verdict::Pass : Verdict::Fail);
  v.bv_termination = bv_termination_violated_ ? Verdict::Fail : Verdict::Pass;
  if (bv_termination_violated_ && v.counterexample.empty())
    v.counterexample = bv_termination_note_;
}

void World::check_stabilization(OracleVerdicts& v) const {
  if (!injected_) {
    v.resolved_within_one_round = Verdict::NotApplicable;
    v.converged_within_o_m = Verdict::NotApplicable;
    return;
  }
  v.resolved_within_one_round =
      (recovery_round_one_seen_ && resolved_after_first_recovery_round_) ? Verdict::Pass
                                                                         : Verdict::Fail;
  const std::uint64_t bound =
      static_cast<std::uint64_t>(params_.convergence_factor) * cfg_.m_rounds;
  const bool converged = all_correct_terminal() && converged_recorded_ &&
                         recovery_rounds_at_convergence_ <= bound;
  v.converged_within_o_m = converged ? Verdict::Pass : Verdict::Fail;
  if (v.converged_within_o_m == Verdict::Fail && v.counterexample.empty())
    v.counterexample = "recovery took " + std::to_string(recovery_rounds_at_convergence_) +
                       " rounds against bound " + std::to_string(bound);
}

void World::finalize_report(TrialReport& report, bool budget_exhausted) {
  report.seed = seed_;
  report.results.resize(cfg_.n);
  report.final_round.resize(cfg_.n);
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    if (!faulty_[i]) refresh_result(i);
    report.results[i] = faulty_[i] ? Result::undecided() : last_result_[i];
    report.final_round[i] = nodes_[i].round();
  }
  report.decision_round = decision_round_;
  report.async_rounds_at_last_decision = async_at_last_decision_;
  report.async_rounds_completed = ledger_.completed_prefix();
  report.recovery_rounds_to_converged = recovery_rounds_at_convergence_;
  report.events = events_;
  report.messages_sent = net_.messages_sent();
  report.messages_delivered = deliveries_;
  report.bytes_sent = net_.messages_sent() * WireMessage::kBytes;
  report.malformed_dropped = malformed_;
  report.liveness_budget_exhausted = budget_exhausted;
  for (std::uint32_t i = 0; i < cfg_.n; ++i)
    if (!faulty_[i] && report.results[i].kind == Result::Kind::TransientError)
      report.any_transient_error = true;
  report.footprint = nodes_[0].memory_footprint_bits();

  OracleVerdicts& verdicts = report.verdicts;
  check_bc_oracles(verdicts);
  check_bv_oracles(verdicts);
  check_stabilization(verdicts);
  verdicts.singleton_agreement = singleton_conflict_ ? Verdict::Fail : Verdict::Pass;
  verdicts.unanimity_persistence = unanimity_violated_ ? Verdict::Fail : Verdict::Pass;
  verdicts.decision_stability =
      injected_ ? Verdict::NotApplicable
                : (stability_violated_ ? Verdict::Fail : Verdict::Pass);
  if (budget_exhausted && verdicts.counterexample.empty())
    verdicts.counterexample = "step budget exhausted before termination";
}

TrialReport run_trial(const TrialParams& params, std::uint64_t trial_seed,
                      std::string* trace_sink) {
  World world(params, trial_seed, trace_sink);
  return world.run();
}

}  // namespace ssbc
