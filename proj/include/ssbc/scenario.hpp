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
#include <string>
#include <vector>

#include "ssbc/engine.hpp"

namespace ssbc {

/// How per-node proposals are chosen for each trial.
enum class ProposalRule : std::uint8_t { Unanimous0, Unanimous1, Split, Random, Explicit };

/// A full experiment description. Serializable as a flat key=value file;
/// see parse_scenario for the key set and defaults.
struct Scenario {
  SystemConfig cfg;
  ProposalRule proposal_rule = ProposalRule::Split;
  std::vector<Bin> explicit_proposals;
  FaultConfig faults;
  ChannelParams channel;
  std::int64_t inject_at = -1;
  CorruptionSpec corruption;
  std::uint64_t trials = 1000;
  std::uint64_t base_seed = 1;
  std::uint64_t step_budget = 1'000'000;
  std::uint32_t convergence_factor = 4;

  void validate() const;
  std::uint64_t hash() const;

  /// Trial-ready parameters; proposals are resolved per trial seed.
  TrialParams trial_params(std::uint64_t trial_seed) const;
};

/// Parses the flat key=value scenario format. Unknown keys are rejected.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

std::string proposal_rule_name(ProposalRule rule);
ProposalRule parse_proposal_rule(const std::string& text, std::vector<Bin>* explicit_out);

}  // namespace ssbc
