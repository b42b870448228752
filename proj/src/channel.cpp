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
#include "ssbc/channel.hpp"

#include <stdexcept>

namespace ssbc {

int ChannelState::enqueue(const WireMessage& msg, const ChannelParams& p, Rng& rng,
                          std::uint64_t now, std::uint64_t ready_at) {
  if (rng.chance(p.drop_probability)) return 0;
  int copies = rng.chance(p.dup_probability) ? 2 : 1;
  for (int c = 0; c < copies; ++c) {
    queue_.push_back(InTransit{msg, now, 0, ready_at});
    while (queue_.size() > p.capacity) queue_.pop_front();
  }
  return copies;
}

void ChannelState::force_enqueue(const WireMessage& msg, std::uint32_t capacity,
                                 std::uint64_t now) {
  queue_.push_back(InTransit{msg, now, 0, 0});
  while (queue_.size() > capacity) queue_.pop_front();
}

bool ChannelState::has_ready(std::uint64_t now) const {
  for (const auto& e : queue_)
    if (e.ready_at <= now) return true;
  return false;
}

const InTransit* ChannelState::oldest_ready(std::uint64_t now) const {
  for (const auto& e : queue_)
    if (e.ready_at <= now) return &e;
  return nullptr;
}

void ChannelState::age_ready(std::uint64_t now) {
  // The aging contract applies to the message next in line; entries behind
  // it start their count once they reach the head.
  for (auto& e : queue_) {
    if (e.ready_at <= now) {
      ++e.skip_count;
      return;
    }
  }
}

std::optional<InTransit> ChannelState::pop_ready(const ChannelParams& p, Rng& rng,
                                                 std::uint64_t now) {
  if (queue_.empty()) return std::nullopt;
  if (p.reorder_probability > 0.0 && queue_.size() > 1 && rng.chance(p.reorder_probability)) {
    std::vector<std::size_t> ready;
    ready.reserve(queue_.size());
    for (std::size_t i = 0; i < queue_.size(); ++i)
      if (queue_[i].ready_at <= now) ready.push_back(i);
    if (ready.empty()) return std::nullopt;
    const std::size_t pick = ready[rng.next_below(ready.size())];
    InTransit out = queue_[pick];
    queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(pick));
    return out;
  }
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    if (queue_[i].ready_at <= now) {
      InTransit out = queue_[i];
      queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
      return out;
    }
  }
  return std::nullopt;
}

Network::Network(std::uint32_t n, const ChannelParams& params, std::uint64_t noise_seed)
    : n_(n), params_(params), noise_rng_(noise_seed) {
  if (params_.fairness_k == 0) params_.fairness_k = 8ull * n * n;
  channels_.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t d = 0; d < n; ++d)
      if (s != d) channels_.emplace_back(s, d);
}

std::size_t Network::index(std::uint32_t src, std::uint32_t dst) const {
  if (src >= n_ || dst >= n_ || src == dst)
    throw std::invalid_argument("network: bad channel endpoints");
  // Each row of n-1 entries skips the diagonal.
  return static_cast<std::size_t>(src) * (n_ - 1) + (dst < src ? dst : dst - 1);
}

ChannelState& Network::channel(std::uint32_t src, std::uint32_t dst) {
  return channels_[index(src, dst)];
}

const ChannelState& Network::channel(std::uint32_t src, std::uint32_t dst) const {
  return channels_[index(src, dst)];
}

int Network::send(std::uint32_t src, std::uint32_t dst, const WireMessage& msg,
                  std::uint64_t now, std::uint64_t extra_delay) {
  ++messages_sent_;
  auto& ch = channel(src, dst);
  const std::size_t before = ch.size();
  const int copies = ch.enqueue(msg, params_, noise_rng_, now,
                                extra_delay == 0 ? 0 : now + extra_delay);
  if (copies == 0) ++messages_dropped_;
  if (copies == 2) ++messages_duplicated_;
  const std::size_t expected = before + static_cast<std::size_t>(copies);
  if (ch.size() < expected) messages_evicted_ += expected - ch.size();
  return copies;
}

bool Network::any_ready(std::uint64_t now) const {
  for (const auto& ch : channels_)
    if (ch.has_ready(now)) return true;
  return false;
}

bool Network::all_empty() const {
  for (const auto& ch : channels_)
    if (!ch.empty()) return false;
  return true;
}

std::size_t Network::in_transit_total() const {
  std::size_t total = 0;
  for (const auto& ch : channels_) total += ch.size();
  return total;
}

std::optional<Network::Delivery> Network::next_deliverable(Rng& sched_rng, std::uint64_t now,
                                                           const std::vector<bool>& faulty) {
  // Aging override first: the starved message with the highest skip count.
  ChannelState* forced = nullptr;
  std::uint64_t worst = 0;
  for (auto& ch : channels_) {
    if (faulty[ch.src()] || faulty[ch.dst()]) continue;
    const InTransit* head = ch.oldest_ready(now);
    if (head && head->skip_count >= params_.fairness_k && head->skip_count >= worst) {
      worst = head->skip_count;
      forced = &ch;
    }
  }
  ChannelState* chosen = forced;
  if (!chosen) {
    ready_scratch_.clear();
    for (auto& ch : channels_)
      if (ch.has_ready(now)) ready_scratch_.push_back(&ch);
    if (ready_scratch_.empty()) return std::nullopt;
    chosen = ready_scratch_[sched_rng.next_below(ready_scratch_.size())];
  }
  auto popped = chosen->pop_ready(params_, noise_rng_, now);
  if (!popped) return std::nullopt;
  for (auto& ch : channels_)
    if (&ch != chosen && !faulty[ch.src()] && !faulty[ch.dst()]) ch.age_ready(now);
  return Delivery{popped->msg, chosen->src(), chosen->dst(), forced != nullptr};
}

}  // namespace ssbc
