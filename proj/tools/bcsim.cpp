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

// Batch experiment runner: loads a scenario (file and/or flags), fans the
// trial campaign across a worker pool, and writes line-delimited JSON
// records plus a human-readable table.
//
// Exit codes: 0 all promised oracles passed; 1 safety oracle failure in a
// corruption-free scenario; 2 usage error; 3 liveness budget exhaustion.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ssbc/campaign.hpp"
#include "ssbc/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bcsim - randomized binary consensus simulation campaigns"};

  std::string scenario_path;
  std::string out_path;
  std::string trace_path;
  std::string variant_text;
  std::string adversary_text;
  std::string proposals_text;
  std::string mutation_text;
  long long nodes = -1, faulty = -1, t_bound = -1, m_rounds = -1;
  long long trials = -1, inject_at = -2, capacity = -1;
  long long seed = -1, jobs = 0, step_budget = -1;
  double drop = -1.0, dup = -1.0, corrupt_intensity = -1.0;

  app.add_option("--scenario", scenario_path, "scenario file (flat key=value)");
  app.add_option("--nodes", nodes, "node count n");
  app.add_option("--faulty", faulty, "number of captured nodes (highest ids)");
  app.add_option("--t", t_bound, "resilience bound t (default: same as --faulty)");
  app.add_option("--m-rounds", m_rounds, "round bound M");
  app.add_option("--variant", variant_text, "bounded | ss | ss-silent");
  app.add_option("--adversary", adversary_text,
                 "none | crash | split-vote | spoiler | random-garbage | delayer");
  app.add_option("--proposals", proposals_text,
                 "unanimous0 | unanimous1 | split | random | comma list");
  app.add_option("--drop", drop, "per-message loss probability");
  app.add_option("--dup", dup, "per-message duplication probability");
  app.add_option("--capacity", capacity, "channel capacity");
  app.add_option("--inject-at", inject_at, "event index of the transient fault (-1 = none)");
  app.add_option("--corrupt-intensity", corrupt_intensity, "fraction of fields scrambled");
  app.add_option("--trials", trials, "trial count");
  app.add_option("--seed", seed, "base seed; trial k uses seed+k");
  app.add_option("--step-budget", step_budget, "per-trial event budget");
  app.add_option("--mutation", mutation_text, "seeded protocol mutation (oracle testing)");
  app.add_option("--out", out_path, "report path (JSONL; table lands at PATH.txt)");
  app.add_option("--trace", trace_path, "trace path (hex wire records)");
  app.add_option("--jobs", jobs, "worker threads (default: hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ssbc::Scenario sc;
  try {
    if (!scenario_path.empty()) sc = ssbc::parse_scenario_file(scenario_path);
    if (nodes >= 0) sc.cfg.n = static_cast<std::uint32_t>(nodes);
    if (faulty >= 0) {
      sc.faults.faulty.clear();
      for (long long k = 0; k < faulty; ++k)
        sc.faults.faulty.push_back(static_cast<std::uint32_t>(sc.cfg.n - 1 - k));
      if (t_bound < 0) sc.cfg.t = static_cast<std::uint32_t>(faulty);
    }
    if (t_bound >= 0) sc.cfg.t = static_cast<std::uint32_t>(t_bound);
    if (m_rounds >= 0) sc.cfg.m_rounds = static_cast<std::uint32_t>(m_rounds);
    if (!variant_text.empty()) {
      if (variant_text == "bounded") sc.cfg.variant = ssbc::Variant::Bounded;
      else if (variant_text == "ss") sc.cfg.variant = ssbc::Variant::Stabilizing;
      else if (variant_text == "ss-silent") sc.cfg.variant = ssbc::Variant::StabilizingSilent;
      else throw std::invalid_argument("unknown variant '" + variant_text + "'");
    }
    if (!adversary_text.empty())
      sc.faults.strategy.kind = ssbc::parse_adversary_kind(adversary_text);
    if (!proposals_text.empty())
      sc.proposal_rule = ssbc::parse_proposal_rule(proposals_text, &sc.explicit_proposals);
    if (!mutation_text.empty()) {
      ssbc::Scenario probe = ssbc::parse_scenario_text("mutation = " + mutation_text);
      sc.cfg.mutation = probe.cfg.mutation;
    }
    if (drop >= 0) sc.channel.drop_probability = drop;
    if (dup >= 0) sc.channel.dup_probability = dup;
    if (capacity >= 0) sc.channel.capacity = static_cast<std::uint32_t>(capacity);
    if (inject_at >= -1) sc.inject_at = inject_at;
    if (corrupt_intensity >= 0) sc.corruption.intensity = corrupt_intensity;
    if (trials >= 0) sc.trials = static_cast<std::uint64_t>(trials);
    if (seed >= 0) sc.base_seed = static_cast<std::uint64_t>(seed);
    if (step_budget >= 0) sc.step_budget = static_cast<std::uint64_t>(step_budget);
    sc.validate();
  } catch (const std::exception& e) {
    std::cerr << "bcsim: " << e.what() << "\n";
    return 2;
  }

  try {
    const ssbc::CampaignResult result =
        ssbc::run_campaign(sc, static_cast<unsigned>(jobs), !trace_path.empty());
    if (!out_path.empty()) {
      ssbc::emit_report(result, out_path);
    }
    if (!trace_path.empty()) {
      std::ofstream tf(trace_path, std::ios::binary);
      if (!tf) throw std::runtime_error("cannot write trace '" + trace_path + "'");
      tf << result.trace;
    }
    std::cout << ssbc::report_table(result);

    if (result.summary.liveness_failures > 0) return 3;
    // Safety is promised whenever no transient fault is injected; the
    // residual 2^-M risk surfaces as transient-error outcomes, not as
    // validity or agreement failures.
    if (sc.inject_at < 0 && result.summary.safety_violations > 0) return 1;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "bcsim: " << e.what() << "\n";
    return 2;
  }
}
