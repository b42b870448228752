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
#include <deque>
#include <optional>
#include <vector>

#include "ssbc/rng.hpp"
#include "ssbc/wire.hpp"

namespace ssbc {

/// Channel noise model. Loss and duplication fire on enqueue; overflow of
/// the bounded queue evicts the oldest in-transit message.
struct ChannelParams {
  std::uint32_t capacity = 32;
  double drop_probability = 0.05;
  double dup_probability = 0.01;
  double reorder_probability = 0.0;
  std::uint64_t fairness_k = 0;  // 0 = default 8*n*n, set by the network
};

/// One in-transit message with its insertion stamp, the aging counter used
/// by the fairness rule, and an optional adversary-imposed delay.
struct InTransit {
  WireMessage msg;
  std::uint64_t stamp = 0;
  std::uint64_t skip_count = 0;
  std::uint64_t ready_at = 0;
};

/// Bounded in-transit queue for one ordered node pair.
class ChannelState {
 public:
  ChannelState() = default;
  ChannelState(std::uint32_t src, std::uint32_t dst) : src_(src), dst_(dst) {}

  std::uint32_t src() const { return src_; }
  std::uint32_t dst() const { return dst_; }
  const std::deque<InTransit>& queue() const { return queue_; }
  std::size_t size() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }
  void clear() { queue_.clear(); }

  /// Applies loss/duplication, appends, and evicts the oldest entry past
  /// capacity. Returns the number of copies actually queued.
  int enqueue(const WireMessage& msg, const ChannelParams& p, Rng& rng,
              std::uint64_t now, std::uint64_t ready_at = 0);

  /// Queues a message verbatim (fault injection path, no noise).
  void force_enqueue(const WireMessage& msg, std::uint32_t capacity, std::uint64_t now);

  std::optional<InTransit> pop_ready(const ChannelParams& p, Rng& rng, std::uint64_t now);
  bool has_ready(std::uint64_t now) const;
  const InTransit* oldest_ready(std::uint64_t now) const;
  void age_ready(std::uint64_t now);

  std::deque<InTransit>& mutable_queue() { return queue_; }

 private:
  std::uint32_t src_ = 0;
  std::uint32_t dst_ = 0;
  std::deque<InTransit> queue_;
};

/// The full fabric: one channel per ordered pair of distinct nodes.
/// Delivery selection is uniformly random over channels with a ready
/// message, with an aging override: once a message between correct nodes
/// has been passed over fairness_k times it is delivered next.
class Network {
 public:
  Network() = default;
  Network(std::uint32_t n, const ChannelParams& params, std::uint64_t noise_seed);

  std::uint32_t node_count() const { return n_; }
  const ChannelParams& params() const { return params_; }

  ChannelState& channel(std::uint32_t src, std::uint32_t dst);
  const ChannelState& channel(std::uint32_t src, std::uint32_t dst) const;

  /// Sends src -> dst through the noise model. Returns copies queued.
  int send(std::uint32_t src, std::uint32_t dst, const WireMessage& msg,
           std::uint64_t now, std::uint64_t extra_delay = 0);

  struct Delivery {
    WireMessage msg;
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    bool forced = false;
  };

  /// Picks and removes the next deliverable message, or nothing when all
  /// channels are empty (or only hold delayed messages).
  std::optional<Delivery> next_deliverable(Rng& sched_rng, std::uint64_t now,
                                           const std::vector<bool>& faulty);

  bool any_ready(std::uint64_t now) const;
  bool all_empty() const;
  std::size_t in_transit_total() const;

  std::vector<ChannelState>& channels() { return channels_; }
  const std::vector<ChannelState>& channels() const { return channels_; }

  std::uint64_t messages_sent() const { return messages_sent_; }
  std::uint64_t messages_dropped() const { return messages_dropped_; }
  std::uint64_t messages_duplicated() const { return messages_duplicated_; }
  std::uint64_t messages_evicted() const { return messages_evicted_; }

 private:
  std::size_t index(std::uint32_t src, std::uint32_t dst) const;

  std::uint32_t n_ = 0;
  ChannelParams params_;
  std::vector<ChannelState> channels_;
  std::vector<ChannelState*> ready_scratch_;
  Rng noise_rng_;
  std::uint64_t messages_sent_ = 0;
  std::uint64_t messages_dropped_ = 0;
  std::uint64_t messages_duplicated_ = 0;
  std::uint64_t messages_evicted_ = 0;
};

}  // namespace ssbc
