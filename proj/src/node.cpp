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
#include "ssbc/node.hpp"

#include <algorithm>
#include <stdexcept>

namespace ssbc {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Bounded: return "bounded";
    case Variant::Stabilizing: return "ss";
    default: return "ss-silent";
  }
}

std::string mutation_name(Mutation m) {
  switch (m) {
    case Mutation::None: return "none";
    case Mutation::InfoResultNoMembershipCheck: return "info-result-no-membership";
    case Mutation::DecideGuardRemoved: return "decide-guard-removed";
    case Mutation::StabilizeSkipped: return "stabilize-skipped";
    case Mutation::PayloadWithoutEcho: return "payload-without-echo";
    default: return "decide-ignores-coin";
  }
}

NodeState::NodeState(const SystemConfig& cfg, std::uint32_t id) : cfg_(cfg), id_(id) {
  cfg_.validate();
  if (id >= cfg_.n) throw std::invalid_argument("node: id out of range");
  est_.assign(rows(), std::vector<BinSet>(cfg_.n));
  aux_.assign(rows(), std::vector<OptBin>(cfg_.n));
}

bool NodeState::is_active() const {
  if (cfg_.variant == Variant::Bounded) return !est_[0][id_].empty();
  return active_;
}

bool NodeState::is_initial() const {
  if (r_ != 0) return false;
  for (const auto& row : est_)
    for (const auto& e : row)
      if (!e.empty()) return false;
  for (const auto& row : aux_)
    for (const auto& a : row)
      if (a.has_value()) return false;
  return true;
}

void NodeState::recompute_active() { active_ = !is_initial(); }

bool NodeState::resolved() const {
  if (est_[0][id_].size() > 1) return false;
  for (std::uint32_t rr = 1; rr < r_; ++rr)
    if (est_[rr][id_].empty() || !aux_[rr][id_].has_value()) return false;
  return true;
}

void NodeState::propose(Bin v) {
  if (!is_bin(v)) throw std::invalid_argument("propose: value must be 0 or 1");
  r_ = 0;
  for (auto& row : est_) std::fill(row.begin(), row.end(), BinSet{});
  for (auto& row : aux_) std::fill(row.begin(), row.end(), OptBin{});
  est_[0][id_] = BinSet::of(v);
  iteration_open_ = false;
  phase_ = Phase::Est;
  mark_active();
}

Result NodeState::result() const {
  const std::uint32_t last = cfg_.m_rounds + 1;
  if (est_[last][id_].is_singleton()) return Result::decided(est_[last][id_].sole());
  if (r_ >= cfg_.m_rounds && !info_result().empty()) return Result::transient_error();
  return Result::undecided();
}

BinSet NodeState::bin_values(std::uint32_t rnd, std::uint32_t x) const {
  if (rnd < 1 || rnd >= rows()) throw std::logic_error("bin_values: round out of range");
  if (x < 1) throw std::logic_error("bin_values: threshold must be positive");
  std::uint32_t count0 = 0;
  std::uint32_t count1 = 0;
  for (std::uint32_t j = 0; j < cfg_.n; ++j) {
    count0 += est_[rnd][j].contains(0);
    count1 += est_[rnd][j].contains(1);
  }
  BinSet out;
  if (count0 >= x) out.insert(0);
  if (count1 >= x) out.insert(1);
  return out;
}

BinSet NodeState::info_result() const {
  if (r_ < 1) throw std::logic_error("info_result: no round open");
  const bool skip_membership = cfg_.mutation == Mutation::InfoResultNoMembershipCheck;
  const BinSet keep = bin_values(r_, cfg_.keep_threshold());
  std::uint32_t members = 0;
  BinSet values;
  for (std::uint32_t j = 0; j < cfg_.n; ++j) {
    const OptBin a = aux_[r_][j];
    if (!a.has_value()) continue;
    if (!skip_membership && !keep.contains(*a)) continue;
    ++members;
    values.insert(*a);
  }
  if (members < cfg_.quorum()) return {};
  return values;
}

void NodeState::decide(Bin x) {
  const std::uint32_t last = cfg_.m_rounds + 1;
  const std::uint32_t first = cfg_.variant == Variant::Bounded ? last : std::min(r_, last);
  const bool unguarded = cfg_.mutation == Mutation::DecideGuardRemoved;
  for (std::uint32_t rr = first; rr <= last; ++rr) {
    if (unguarded || est_[rr][id_].empty() || !aux_[rr][id_].has_value()) {
      est_[rr][id_] = BinSet::of(x);
      aux_[rr][id_] = x;
    }
  }
  if (cfg_.variant == Variant::StabilizingSilent) r_ = last;
  mark_active();
}

void NodeState::try_to_decide(BinSet values, const CoinSchedule& coin) {
  if (r_ < 1) throw std::logic_error("try_to_decide: no round open");
  if (values.is_singleton()) {
    const Bin v = values.sole();
    est_[r_][id_] = BinSet::of(v);
    if (v == coin.bit(r_) || cfg_.mutation == Mutation::DecideIgnoresCoin) decide(v);
  } else {
    est_[r_][id_] = BinSet::of(coin.bit(r_));
  }
  mark_active();
}

void NodeState::stabilize() {
  if (!is_active()) throw std::logic_error("stabilize: node is inactive");
  if (est_[0][id_].size() > 1) est_[0][id_] = BinSet::of(est_[0][id_].min_value());
  // A corrupted empty round-0 estimate has no member to copy; back-fill with
  // the domain minimum so the rows below r become well-formed.
  const Bin fill = est_[0][id_].empty() ? Bin{0} : est_[0][id_].sole();
  const BinSet fill_set = est_[0][id_].empty() ? BinSet::of(fill) : est_[0][id_];
  // The repair runs through row r inclusive: the round counter is about to
  // advance past it, and in a run without faults that slot already holds the
  // previous try-to-decide output, making the extra row a no-op.
  for (std::uint32_t rr = 1; rr <= r_ && rr < rows(); ++rr) {
    if (est_[rr][id_].empty() || !aux_[rr][id_].has_value()) {
      est_[rr][id_] = fill_set;
      aux_[rr][id_] = fill;
    }
  }
}

void NodeState::begin_iteration() {
  if (!is_active()) return;
  if (iteration_open_) throw std::logic_error("begin_iteration: previous iteration still open");
  if (cfg_.variant != Variant::Bounded && cfg_.mutation != Mutation::StabilizeSkipped)
    stabilize();
  r_ = std::min(r_ + 1, cfg_.round_cap());
  iteration_open_ = true;
  phase_ = Phase::Est;
  mark_active();
}

Bin NodeState::pick_aux_value(BinSet candidates) const {
  // Prefer the member already carried by the node's own estimate so the
  // committed value stays consistent with what it broadcasts.
  const BinSet own = est_[r_ - 1][id_];
  if (own.is_singleton() && candidates.contains(own.sole())) return own.sole();
  return candidates.min_value();
}

EstMessage NodeState::broadcast_payload() {
  if (!is_active()) throw std::logic_error("broadcast_payload: node is inactive");
  if (r_ < 1) throw std::logic_error("broadcast_payload: no round open");
  if (cfg_.variant != Variant::Bounded) {
    const BinSet keep = bin_values(r_, cfg_.keep_threshold());
    const OptBin cur = aux_[r_][id_];
    if (!keep.empty() && (!cur.has_value() || !keep.contains(*cur))) {
      aux_[r_][id_] = pick_aux_value(keep);
      mark_active();
    }
  }
  BinSet est_field = est_[r_ - 1][id_];
  if (cfg_.mutation != Mutation::PayloadWithoutEcho)
    est_field.merge(bin_values(r_, cfg_.echo_threshold()));
  const OptBin aux_field =
      cfg_.variant == Variant::Bounded ? OptBin{} : aux_[r_][id_];
  return EstMessage{true, r_, est_field, aux_field};
}

bool NodeState::round_phase_complete() const { return !info_result().empty(); }

void NodeState::silent_extension_check() {
  if (cfg_.variant != Variant::StabilizingSilent)
    throw std::logic_error("silent_extension_check: wrong variant");
  const BinSet seen = bin_values(cfg_.m_rounds + 1, cfg_.echo_threshold());
  if (!seen.empty()) decide(seen.min_value());
}

NodeState::EstHandling NodeState::on_est_message(std::uint32_t from, const EstMessage& msg) {
  if (from >= cfg_.n) throw std::invalid_argument("on_est_message: sender out of range");
  if (msg.rnd < 1 || msg.rnd >= rows()) return {};
  if (!msg.est.empty()) mark_active();
  est_[msg.rnd][from].merge(msg.est);
  if (msg.aux.has_value()) {
    aux_[msg.rnd][from] = msg.aux;
    mark_active();
  }
  EstHandling out{true, std::nullopt};
  if (msg.ack_req) {
    const std::uint32_t aux_row =
        cfg_.literal_ack_aux_index ? std::min(r_, cfg_.m_rounds + 1) : msg.rnd;
    const OptBin aux_field =
        cfg_.variant == Variant::Bounded ? OptBin{} : aux_[aux_row][id_];
    // The ack re-offers everything this node relayed for the requested
    // round. Two subtleties: the previous-round slot is only a settled
    // estimate once this node has itself reached msg.rnd (before that the
    // slot is still accumulating receptions and must not be passed off as
    // an estimate), and the echo set rides along so a straggler can still
    // recover values whose loop broadcasts were all lost.
    BinSet est_field;
    if (r_ >= msg.rnd) est_field = est_[msg.rnd - 1][id_];
    if (cfg_.mutation != Mutation::PayloadWithoutEcho)
      est_field.merge(bin_values(msg.rnd, cfg_.echo_threshold()));
    out.reply = EstMessage{false, msg.rnd, est_field, aux_field};
  }
  return out;
}

NodeState::AuxHandling NodeState::on_aux_message(std::uint32_t from, const AuxMessage& msg) {
  if (cfg_.variant != Variant::Bounded)
    throw std::logic_error("on_aux_message: AUX records exist only in the bounded variant");
  if (from >= cfg_.n) throw std::invalid_argument("on_aux_message: sender out of range");
  if (msg.rnd < 1 || msg.rnd >= rows()) return {};
  if (msg.aux.has_value()) {
    aux_[msg.rnd][from] = msg.aux;
    mark_active();
  }
  AuxHandling out{true, std::nullopt};
  if (msg.ack_req) out.reply = AuxMessage{false, msg.rnd, aux_[msg.rnd][id_]};
  return out;
}

void NodeState::apply_self(const EstMessage& msg) {
  if (msg.rnd < 1 || msg.rnd >= rows()) return;
  if (!msg.est.empty()) mark_active();
  est_[msg.rnd][id_].merge(msg.est);
  if (msg.aux.has_value()) {
    aux_[msg.rnd][id_] = msg.aux;
    mark_active();
  }
}

void NodeState::apply_self(const AuxMessage& msg) {
  if (msg.rnd < 1 || msg.rnd >= rows()) return;
  if (msg.aux.has_value()) {
    aux_[msg.rnd][id_] = msg.aux;
    mark_active();
  }
}

void NodeState::alg2_aux_refresh() {
  const BinSet keep = bin_values(r_, cfg_.keep_threshold());
  if (!keep.empty()) {
    aux_[r_][id_] = pick_aux_value(keep);
    mark_active();
  }
}

bool NodeState::est_phase_complete() const { return aux_[r_][id_].has_value(); }

AuxMessage NodeState::aux_broadcast_payload() const {
  if (r_ < 1) throw std::logic_error("aux_broadcast_payload: no round open");
  return AuxMessage{true, r_, aux_[r_][id_]};
}

FootprintBits NodeState::memory_footprint_bits() const {
  const std::uint64_t entries = rows();
  std::uint32_t counter_bits = 0;
  while ((1ull << counter_bits) < entries) ++counter_bits;
  FootprintBits f;
  // Packed payload per tracked peer: 2 bits per estimate set plus 1 bit per
  // committed auxiliary value. The presence plane for the optional values
  // (the ~0.6 bit rounded up to 1) is charged to the total only.
  f.per_peer_column_bits = entries * 3;
  f.total_bits = cfg_.n * entries * 4 + counter_bits;
  return f;
}

void NodeState::set_round(std::uint32_t r) {
  if (r >= rows()) throw std::invalid_argument("set_round: out of domain");
  r_ = r;
  recompute_active();
}

void NodeState::set_est_entry(std::uint32_t rnd, std::uint32_t j, BinSet v) {
  if (rnd >= rows() || j >= cfg_.n) throw std::invalid_argument("set_est_entry: out of domain");
  est_[rnd][j] = v;
  recompute_active();
}

void NodeState::set_aux_entry(std::uint32_t rnd, std::uint32_t j, OptBin v) {
  if (rnd >= rows() || j >= cfg_.n) throw std::invalid_argument("set_aux_entry: out of domain");
  if (v.has_value() && !is_bin(*v)) throw std::invalid_argument("set_aux_entry: out of domain");
  aux_[rnd][j] = v;
  recompute_active();
}

}  // namespace ssbc
