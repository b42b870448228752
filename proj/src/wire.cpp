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
#include "ssbc/wire.hpp"

#include <array>

namespace ssbc {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

WireMessage WireMessage::from_est(std::uint16_t sender, std::uint16_t dst, const EstMessage& m) {
  WireMessage w;
  w.sender = sender;
  w.dst = dst;
  w.kind = MsgKind::Est;
  w.ack_req = m.ack_req;
  w.rnd = static_cast<std::uint16_t>(m.rnd);
  w.est_bits = m.est.bits();
  w.set_aux(m.aux);
  return w;
}

WireMessage WireMessage::from_aux(std::uint16_t sender, std::uint16_t dst, const AuxMessage& m) {
  WireMessage w;
  w.sender = sender;
  w.dst = dst;
  w.kind = MsgKind::Aux;
  w.ack_req = m.ack_req;
  w.rnd = static_cast<std::uint16_t>(m.rnd);
  w.est_bits = 0;
  w.set_aux(m.aux);
  return w;
}

EstMessage WireMessage::to_est() const {
  return EstMessage{ack_req, rnd, BinSet::from_bits(est_bits), aux()};
}

AuxMessage WireMessage::to_aux() const { return AuxMessage{ack_req, rnd, aux()}; }

std::string WireMessage::encode_hex() const {
  std::array<std::uint8_t, kBytes> raw{};
  raw[0] = static_cast<std::uint8_t>(sender >> 8);
  raw[1] = static_cast<std::uint8_t>(sender & 0xFF);
  raw[2] = static_cast<std::uint8_t>(dst >> 8);
  raw[3] = static_cast<std::uint8_t>(dst & 0xFF);
  raw[4] = static_cast<std::uint8_t>(kind);
  raw[5] = ack_req ? 1 : 0;
  raw[6] = static_cast<std::uint8_t>(rnd >> 8);
  raw[7] = static_cast<std::uint8_t>(rnd & 0xFF);
  raw[8] = est_bits;
  raw[9] = aux_byte;
  std::string out(kBytes * 2, '0');
  for (std::size_t i = 0; i < kBytes; ++i) {
    out[2 * i] = kHexDigits[raw[i] >> 4];
    out[2 * i + 1] = kHexDigits[raw[i] & 0xF];
  }
  return out;
}

std::optional<WireMessage> WireMessage::decode_hex(const std::string& line) {
  if (line.size() != kBytes * 2) return std::nullopt;
  std::array<std::uint8_t, kBytes> raw{};
  for (std::size_t i = 0; i < kBytes; ++i) {
    const int hi = hex_value(line[2 * i]);
    const int lo = hex_value(line[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    raw[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  if (raw[4] > 1 || raw[5] > 1) return std::nullopt;
  WireMessage w;
  w.sender = static_cast<std::uint16_t>((raw[0] << 8) | raw[1]);
  w.dst = static_cast<std::uint16_t>((raw[2] << 8) | raw[3]);
  w.kind = static_cast<MsgKind>(raw[4]);
  w.ack_req = raw[5] != 0;
  w.rnd = static_cast<std::uint16_t>((raw[6] << 8) | raw[7]);
  w.est_bits = raw[8] & 0b11;
  w.aux_byte = raw[9] <= 1 ? raw[9] : kNoAux;
  return w;
}

}  // namespace ssbc
