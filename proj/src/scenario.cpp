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
#include "ssbc/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ssbc/rng.hpp"

namespace ssbc {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::uint32_t> parse_index_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
  }
  return out;
}

Variant parse_variant(const std::string& name) {
  if (name == "bounded") return Variant::Bounded;
  if (name == "ss") return Variant::Stabilizing;
  if (name == "ss-silent") return Variant::StabilizingSilent;
  throw std::invalid_argument("unknown variant '" + name + "'; valid: bounded, ss, ss-silent");
}

Mutation parse_mutation(const std::string& name) {
  for (int m = 0; m <= static_cast<int>(Mutation::DecideIgnoresCoin); ++m)
    if (mutation_name(static_cast<Mutation>(m)) == name) return static_cast<Mutation>(m);
  throw std::invalid_argument("unknown mutation '" + name + "'");
}

}  // namespace

std::string proposal_rule_name(ProposalRule rule) {
  switch (rule) {
    case ProposalRule::Unanimous0: return "unanimous0";
    case ProposalRule::Unanimous1: return "unanimous1";
    case ProposalRule::Split: return "split";
    case ProposalRule::Random: return "random";
    default: return "explicit";
  }
}

ProposalRule parse_proposal_rule(const std::string& text, std::vector<Bin>* explicit_out) {
  if (text == "unanimous0") return ProposalRule::Unanimous0;
  if (text == "unanimous1") return ProposalRule::Unanimous1;
  if (text == "split") return ProposalRule::Split;
  if (text == "random") return ProposalRule::Random;
  // Otherwise a comma list of bits, one per node.
  std::vector<Bin> bits;
  for (auto v : parse_index_list(text)) {
    if (v > 1) throw std::invalid_argument("proposals: values must be 0 or 1");
    bits.push_back(static_cast<Bin>(v));
  }
  if (bits.empty()) throw std::invalid_argument("proposals: empty list");
  if (explicit_out) *explicit_out = bits;
  return ProposalRule::Explicit;
}

void Scenario::validate() const {
  cfg.validate();
  faults.validate(cfg);
  if (trials < 1) throw std::invalid_argument("scenario: trials must be >= 1");
  if (proposal_rule == ProposalRule::Explicit && explicit_proposals.size() != cfg.n)
    throw std::invalid_argument("scenario: explicit proposals must list one bit per node");
  if (channel.capacity < 1) throw std::invalid_argument("scenario: capacity must be >= 1");
  if (channel.drop_probability < 0 || channel.drop_probability > 1 ||
      channel.dup_probability < 0 || channel.dup_probability > 1 ||
      channel.reorder_probability < 0 || channel.reorder_probability > 1)
    throw std::invalid_argument("scenario: probabilities must lie in [0,1]");
  if (corruption.intensity < 0 || corruption.intensity > 1)
    throw std::invalid_argument("scenario: corruption intensity must lie in [0,1]");
}

std::uint64_t Scenario::hash() const {
  std::uint64_t h = 0x5B5C1A5Dull;
  for (std::uint64_t x :
       {static_cast<std::uint64_t>(cfg.n), static_cast<std::uint64_t>(cfg.t),
        static_cast<std::uint64_t>(cfg.m_rounds), static_cast<std::uint64_t>(cfg.variant),
        static_cast<std::uint64_t>(cfg.mutation),
        static_cast<std::uint64_t>(cfg.literal_ack_aux_index),
        static_cast<std::uint64_t>(proposal_rule), static_cast<std::uint64_t>(faults.strategy.kind),
        faults.strategy.garbage_seed, faults.strategy.delay_bound,
        static_cast<std::uint64_t>(channel.capacity), channel.fairness_k,
        static_cast<std::uint64_t>(inject_at + 1), corruption.seed,
        static_cast<std::uint64_t>(corruption.corrupt_channels), trials, base_seed, step_budget,
        static_cast<std::uint64_t>(convergence_factor)})
    h = mix64(h ^ x);
  h = mix64(h ^ static_cast<std::uint64_t>(channel.drop_probability * (1u << 30)));
  h = mix64(h ^ static_cast<std::uint64_t>(channel.dup_probability * (1u << 30)));
  h = mix64(h ^ static_cast<std::uint64_t>(channel.reorder_probability * (1u << 30)));
  h = mix64(h ^ static_cast<std::uint64_t>(corruption.intensity * (1u << 30)));
  for (auto f : faults.faulty) h = mix64(h ^ (0xFA017ull + f));
  for (auto p : explicit_proposals) h = mix64(h ^ (0x9407ull + p));
  for (auto t : corruption.target_nodes) h = mix64(h ^ (0xC0437ull + t));
  return h;
}

TrialParams Scenario::trial_params(std::uint64_t trial_seed) const {
  TrialParams p;
  p.cfg = cfg;
  p.faults = faults;
  p.channel = channel;
  p.inject_at = inject_at;
  p.corruption = corruption;
  p.step_budget = step_budget;
  p.convergence_factor = convergence_factor;
  p.scenario_hash = hash();
  p.proposals.resize(cfg.n);
  Rng prop_rng(derive_seed(trial_seed, 6));
  for (std::uint32_t i = 0; i < cfg.n; ++i) {
    switch (proposal_rule) {
      case ProposalRule::Unanimous0: p.proposals[i] = 0; break;
      case ProposalRule::Unanimous1: p.proposals[i] = 1; break;
      case ProposalRule::Split: p.proposals[i] = static_cast<Bin>(i & 1); break;
      case ProposalRule::Random: p.proposals[i] = static_cast<Bin>(prop_rng.next_below(2)); break;
      case ProposalRule::Explicit: p.proposals[i] = explicit_proposals[i]; break;
    }
  }
  return p;
}

Scenario parse_scenario_text(const std::string& text) {
  Scenario sc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool faulty_listed = false;
  std::int64_t faulty_count = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "nodes") sc.cfg.n = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "faulty") {
        if (value.find(',') != std::string::npos) {
          sc.faults.faulty = parse_index_list(value);
          faulty_listed = true;
        } else {
          faulty_count = std::stol(value);
        }
      } else if (key == "faulty_ids") {
        sc.faults.faulty = parse_index_list(value);
        faulty_listed = true;
      } else if (key == "t") sc.cfg.t = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "m_rounds") sc.cfg.m_rounds = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "variant") sc.cfg.variant = parse_variant(value);
      else if (key == "mutation") sc.cfg.mutation = parse_mutation(value);
      else if (key == "literal_ack_aux_index") sc.cfg.literal_ack_aux_index = value == "true" || value == "1";
      else if (key == "adversary") sc.faults.strategy.kind = parse_adversary_kind(value);
      else if (key == "garbage_seed") sc.faults.strategy.garbage_seed = std::stoull(value);
      else if (key == "delay_bound") sc.faults.strategy.delay_bound = std::stoull(value);
      else if (key == "proposals") sc.proposal_rule = parse_proposal_rule(value, &sc.explicit_proposals);
      else if (key == "capacity") sc.channel.capacity = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "drop") sc.channel.drop_probability = std::stod(value);
      else if (key == "dup") sc.channel.dup_probability = std::stod(value);
      else if (key == "reorder") sc.channel.reorder_probability = std::stod(value);
      else if (key == "fairness_k") sc.channel.fairness_k = std::stoull(value);
      else if (key == "inject_at") sc.inject_at = std::stoll(value);
      else if (key == "corrupt_intensity") sc.corruption.intensity = std::stod(value);
      else if (key == "corrupt_seed") sc.corruption.seed = std::stoull(value);
      else if (key == "corrupt_nodes") sc.corruption.target_nodes = parse_index_list(value);
      else if (key == "corrupt_channels") sc.corruption.corrupt_channels = value == "true" || value == "1";
      else if (key == "trials") sc.trials = std::stoull(value);
      else if (key == "seed") sc.base_seed = std::stoull(value);
      else if (key == "step_budget") sc.step_budget = std::stoull(value);
      else if (key == "convergence_factor") sc.convergence_factor = static_cast<std::uint32_t>(std::stoul(value));
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": bad value for '" +
                                  key + "'");
    }
  }
  // A bare count picks the highest-index nodes as the captured set.
  if (!faulty_listed && faulty_count >= 0) {
    sc.faults.faulty.clear();
    for (std::int64_t k = 0; k < faulty_count; ++k)
      sc.faults.faulty.push_back(static_cast<std::uint32_t>(sc.cfg.n - 1 - k));
  }
  sc.validate();
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

}  // namespace ssbc
