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
#include <stdexcept>
#include <string>

namespace ssbc {

/// Binary consensus value: 0 or 1.
using Bin = std::uint8_t;

constexpr bool is_bin(unsigned v) { return v <= 1; }

/// Optional binary value; empty models the protocol's bottom symbol.
using OptBin = std::optional<Bin>;

/// A subset of {0,1}, held in the two low bits: bit0 = contains 0,
/// bit1 = contains 1. Four states: {}, {0}, {1}, {0,1}.
class BinSet {
 public:
  constexpr BinSet() = default;
  static constexpr BinSet from_bits(std::uint8_t bits) {
    BinSet s;
    s.bits_ = bits & 0b11u;
    return s;
  }
  static constexpr BinSet of(Bin v) { return from_bits(static_cast<std::uint8_t>(1u << v)); }
  static constexpr BinSet both() { return from_bits(0b11); }

  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(Bin v) const { return (bits_ >> v) & 1u; }
  constexpr int size() const { return (bits_ & 1) + ((bits_ >> 1) & 1); }
  constexpr bool is_singleton() const { return size() == 1; }

  /// The sole member; only valid on singletons.
  constexpr Bin sole() const { return bits_ == 0b10 ? Bin{1} : Bin{0}; }

  /// Smallest member (0 before 1); only valid on nonempty sets.
  constexpr Bin min_value() const { return (bits_ & 1u) ? Bin{0} : Bin{1}; }

  constexpr void insert(Bin v) { bits_ |= static_cast<std::uint8_t>(1u << v); }
  constexpr void merge(BinSet other) { bits_ |= other.bits_; }
  constexpr BinSet united(BinSet other) const { return from_bits(bits_ | other.bits_); }
  constexpr bool subset_of(BinSet other) const { return (bits_ & ~other.bits_) == 0; }

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool operator==(const BinSet&) const = default;

  std::string str() const {
    switch (bits_) {
      case 0b00: return "{}";
      case 0b01: return "{0}";
      case 0b10: return "{1}";
      default: return "{0,1}";
    }
  }

 private:
  std::uint8_t bits_ = 0;
};

/// Outcome of result(): undecided, a decided bit, or the transient error
/// reported once the round bound was exceeded.
struct Result {
  enum class Kind : std::uint8_t { Undecided, Decided, TransientError };

  Kind kind = Kind::Undecided;
  Bin value = 0;

  static Result undecided() { return {Kind::Undecided, 0}; }
  static Result decided(Bin v) { return {Kind::Decided, v}; }
  static Result transient_error() { return {Kind::TransientError, 0}; }

  bool terminal() const { return kind != Kind::Undecided; }
  bool decided_value(Bin v) const { return kind == Kind::Decided && value == v; }
  bool operator==(const Result&) const = default;

  std::string str() const {
    switch (kind) {
      case Kind::Undecided: return "bot";
      case Kind::Decided: return value ? "1" : "0";
      default: return "err";
    }
  }
};

/// Protocol variant. Bounded is the non-stabilizing two-phase version;
/// Stabilizing merges the phases and self-repairs; StabilizingSilent adds
/// the decide-fast extension that jumps the round counter to M+1.
enum class Variant : std::uint8_t { Bounded, Stabilizing, StabilizingSilent };

/// Seeded protocol defects for the oracle mutation suite. None in production.
enum class Mutation : std::uint8_t {
  None,
  InfoResultNoMembershipCheck,  // info_result accepts aux values outside binValues(r,2t+1)
  DecideGuardRemoved,           // decide overwrites already-filled entries
  StabilizeSkipped,             // begin_iteration omits the state repair
  PayloadWithoutEcho,           // broadcast est field drops the binValues(r,t+1) union
  DecideIgnoresCoin,            // try_to_decide decides any singleton without coin match
};

std::string variant_name(Variant v);
std::string mutation_name(Mutation m);

struct SystemConfig {
  std::uint32_t n = 4;         // node count
  std::uint32_t t = 1;         // max Byzantine count, 3t+1 <= n
  std::uint32_t m_rounds = 30; // round bound M >= 1
  Variant variant = Variant::StabilizingSilent;
  Mutation mutation = Mutation::None;
  // When set, EST acks carry aux[r][i] of the replier's own round, as the
  // literal pseudocode reads, instead of aux[rJ][i] of the requested round.
  bool literal_ack_aux_index = false;

  std::uint32_t quorum() const { return n - t; }          // n-t
  std::uint32_t echo_threshold() const { return t + 1; }  // t+1
  std::uint32_t keep_threshold() const { return 2 * t + 1; }

  /// Highest round index a node may hold. Tables span [0, M+1] regardless;
  /// only StabilizingSilent lets the counter itself reach M+1.
  std::uint32_t round_cap() const {
    return variant == Variant::StabilizingSilent ? m_rounds + 1 : m_rounds;
  }

  void validate() const {
    if (3 * t + 1 > n) throw std::invalid_argument("config: resilience bound 3t+1 <= n violated");
    if (m_rounds < 1) throw std::invalid_argument("config: m_rounds must be >= 1");
    if (n < 1 || n > 0xFFFF) throw std::invalid_argument("config: node count out of range");
  }
};

}  // namespace ssbc
