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
#include <string>

#include "ssbc/node.hpp"
#include "ssbc/types.hpp"

namespace ssbc {

enum class MsgKind : std::uint8_t { Est = 0, Aux = 1 };

/// Fixed-width wire record, 10 bytes:
///   sender(16) dst(16) kind(8) ack_req(8) rnd(16) est(8, bitmask)
///   aux(8, 0/1/255 for bottom).
/// Trace dumps emit one record per line as 20 hex digits.
struct WireMessage {
  std::uint16_t sender = 0;
  std::uint16_t dst = 0;
  MsgKind kind = MsgKind::Est;
  bool ack_req = false;
  std::uint16_t rnd = 1;
  std::uint8_t est_bits = 0;
  std::uint8_t aux_byte = 255;

  static constexpr std::uint8_t kNoAux = 255;

  static WireMessage from_est(std::uint16_t sender, std::uint16_t dst, const EstMessage& m);
  static WireMessage from_aux(std::uint16_t sender, std::uint16_t dst, const AuxMessage& m);

  EstMessage to_est() const;
  AuxMessage to_aux() const;

  OptBin aux() const {
    if (aux_byte > 1) return std::nullopt;
    return static_cast<Bin>(aux_byte);
  }
  void set_aux(OptBin v) { aux_byte = v.has_value() ? *v : kNoAux; }

  std::string encode_hex() const;
  static std::optional<WireMessage> decode_hex(const std::string& line);

  static constexpr std::size_t kBytes = 10;

  bool operator==(const WireMessage&) const = default;
};

}  // namespace ssbc
