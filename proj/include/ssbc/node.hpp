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
#include <optional>
#include <vector>

#include "ssbc/coin.hpp"
#include "ssbc/types.hpp"

namespace ssbc {

/// EST wire record: round-r estimate set plus the sender's committed
/// auxiliary value. ack_req asks the receiver for an immediate reply.
struct EstMessage {
  bool ack_req = false;
  std::uint32_t rnd = 1;
  BinSet est;
  OptBin aux;

  bool operator==(const EstMessage&) const = default;
};

/// AUX wire record used by the Bounded (two-phase) variant only.
struct AuxMessage {
  bool ack_req = false;
  std::uint32_t rnd = 1;
  OptBin aux;

  bool operator==(const AuxMessage&) const = default;
};

/// Packed-state accounting, see memory_footprint_bits().
struct FootprintBits {
  std::uint64_t total_bits = 0;
  std::uint64_t per_peer_column_bits = 0;
};

/// One processor's consensus state machine. Pure and event driven: the
/// engine owns scheduling and transport; everything here is a state
/// transition on the (r, est, aux) tuple.
///
/// est[r][j] collects the estimate sets received from node j for round r;
/// aux[r][j] the auxiliary value j committed to for round r. Both tables
/// span rounds 0..M+1 and are preallocated, so a run never grows memory.
class NodeState {
 public:
  NodeState(const SystemConfig& cfg, std::uint32_t id);

  const SystemConfig& config() const { return cfg_; }
  std::uint32_t id() const { return id_; }
  std::uint32_t round() const { return r_; }
  std::uint32_t rows() const { return cfg_.m_rounds + 2; }

  BinSet est_at(std::uint32_t rnd, std::uint32_t j) const { return est_[rnd][j]; }
  OptBin aux_at(std::uint32_t rnd, std::uint32_t j) const { return aux_[rnd][j]; }

  /// Active means the node ever left initState; the do-forever body is a
  /// no-op until then. The Bounded variant uses its own weaker guard.
  bool is_active() const;
  bool is_initial() const;

  /// Node-local resolved predicate: round-0 estimate has at most one member
  /// and no row below the current round has an empty slot.
  bool resolved() const;

  /// Resets to initState, then seeds est[0][id] with the proposal.
  void propose(Bin v);

  Result result() const;

  /// Values held by at least x distinct nodes in round rnd.
  BinSet bin_values(std::uint32_t rnd, std::uint32_t x) const;

  /// The set the round closes on: aux values of a quorum whose entries all
  /// lie inside binValues(r, 2t+1); empty while the quorum is short.
  BinSet info_result() const;

  void decide(Bin x);
  void try_to_decide(BinSet values, const CoinSchedule& coin);

  /// State repair: collapses a two-valued round-0 estimate and back-fills
  /// every empty slot below the current round. Idempotent.
  void stabilize();

  /// Opens the next iteration: repair (non-Bounded variants), then advance
  /// the round counter under the variant's cap. No-op when inactive.
  void begin_iteration();
  bool iteration_open() const { return iteration_open_; }
  void close_iteration() { iteration_open_ = false; }

  /// The EST record broadcast by one loop-body pass. Runs the aux-refresh
  /// rule first for the merged-loop variants.
  EstMessage broadcast_payload();

  /// Loop exit test; when true the engine runs try_to_decide(info_result()).
  bool round_phase_complete() const;

  /// Boxed extension: adopt a decision already held by t+1 nodes.
  void silent_extension_check();

  struct EstHandling {
    bool accepted = false;
    std::optional<EstMessage> reply;
  };
  EstHandling on_est_message(std::uint32_t from, const EstMessage& msg);

  struct AuxHandling {
    bool accepted = false;
    std::optional<AuxMessage> reply;
  };
  AuxHandling on_aux_message(std::uint32_t from, const AuxMessage& msg);

  /// Local effect of the node's own broadcast; a broadcast includes the
  /// sender, and the self-copy is applied at send time rather than queued.
  void apply_self(const EstMessage& msg);
  void apply_self(const AuxMessage& msg);

  // Bounded-variant phases: EST exchange until aux[r][i] is set, then AUX
  // exchange until info_result() is nonempty.
  enum class Phase : std::uint8_t { Est, Aux };
  Phase phase() const { return phase_; }
  void alg2_aux_refresh();
  bool est_phase_complete() const;
  void advance_to_aux_phase() { phase_ = Phase::Aux; }
  AuxMessage aux_broadcast_payload() const;

  FootprintBits memory_footprint_bits() const;

  // Raw domain-checked writers for fault injection and tests.
  void set_round(std::uint32_t r);
  void set_est_entry(std::uint32_t rnd, std::uint32_t j, BinSet v);
  void set_aux_entry(std::uint32_t rnd, std::uint32_t j, OptBin v);

 private:
  Bin pick_aux_value(BinSet candidates) const;
  void mark_active() { active_ = true; }
  void recompute_active();

  SystemConfig cfg_;
  std::uint32_t id_;
  std::uint32_t r_ = 0;
  std::vector<std::vector<BinSet>> est_;
  std::vector<std::vector<OptBin>> aux_;
  bool active_ = false;
  bool iteration_open_ = false;
  Phase phase_ = Phase::Est;
};

}  // namespace ssbc
