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
#include "ssbc/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace ssbc {
namespace {

using ordered_json = nlohmann::ordered_json;

std::int32_t worst_correct_decision_round(const Scenario& sc, const TrialReport& r) {
  const auto mask = sc.faults.faulty_mask(sc.cfg.n);
  std::int32_t worst = -1;
  for (std::uint32_t i = 0; i < sc.cfg.n; ++i) {
    if (mask[i]) continue;
    if (r.decision_round[i] < 0) return -1;  // someone never decided
    worst = std::max(worst, r.decision_round[i]);
  }
  return worst;
}

void count_failure(CampaignSummary& s, const char* name, Verdict v) {
  if (v == Verdict::Fail) ++s.oracle_failures[name];
}

double percentile(std::vector<std::int32_t>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const std::size_t idx =
      std::min(sorted.size() - 1, static_cast<std::size_t>(q * static_cast<double>(sorted.size())));
  return static_cast<double>(sorted[idx]);
}

}  // namespace

CampaignSummary summarize(const Scenario& scenario, const std::vector<TrialReport>& reports) {
  CampaignSummary s;
  s.trials = reports.size();
  double round_sum = 0.0;
  double async_sum = 0.0;
  double msg_sum = 0.0;
  std::uint64_t decided_trials = 0;
  std::vector<std::int32_t> rounds;
  rounds.reserve(reports.size());
  for (const auto& r : reports) {
    const std::int32_t worst = worst_correct_decision_round(scenario, r);
    ++s.decision_round_hist[worst];
    ++s.async_round_hist[r.async_rounds_at_last_decision];
    if (worst >= 0) {
      round_sum += worst;
      async_sum += static_cast<double>(r.async_rounds_at_last_decision);
      rounds.push_back(worst);
      ++decided_trials;
    }
    msg_sum += static_cast<double>(r.messages_sent);
    if (r.verdicts.safety_failure()) ++s.safety_violations;
    if (r.any_transient_error) ++s.transient_error_trials;
    if (r.liveness_budget_exhausted) ++s.liveness_failures;
    ++s.oracle_evaluations;
    count_failure(s, "bc_validity", r.verdicts.bc_validity);
    count_failure(s, "bc_agreement", r.verdicts.bc_agreement);
    count_failure(s, "bc_termination", r.verdicts.bc_termination);
    count_failure(s, "bv_validity", r.verdicts.bv_validity);
    count_failure(s, "bv_uniformity", r.verdicts.bv_uniformity);
    count_failure(s, "bv_termination", r.verdicts.bv_termination);
    count_failure(s, "resolved_within_one_round", r.verdicts.resolved_within_one_round);
    count_failure(s, "converged_within_o_m", r.verdicts.converged_within_o_m);
    count_failure(s, "singleton_agreement", r.verdicts.singleton_agreement);
    count_failure(s, "unanimity_persistence", r.verdicts.unanimity_persistence);
    count_failure(s, "decision_stability", r.verdicts.decision_stability);
    if (r.verdicts.resolved_within_one_round != Verdict::NotApplicable) {
      ++s.stabilization_trials;
      if (r.verdicts.resolved_within_one_round == Verdict::Pass) ++s.resolved_pass;
      if (r.verdicts.converged_within_o_m == Verdict::Pass) ++s.converged_pass;
    }
    s.footprint_total_bits = r.footprint.total_bits;
    s.footprint_column_bits = r.footprint.per_peer_column_bits;
  }
  if (decided_trials > 0) {
    s.mean_decision_round = round_sum / static_cast<double>(decided_trials);
    s.mean_async_rounds = async_sum / static_cast<double>(decided_trials);
  }
  if (s.trials > 0) s.mean_messages = msg_sum / static_cast<double>(s.trials);
  std::sort(rounds.begin(), rounds.end());
  s.p50_decision_round = percentile(rounds, 0.50);
  s.p99_decision_round = percentile(rounds, 0.99);
  return s;
}

CampaignResult run_campaign(const Scenario& scenario, unsigned jobs, bool keep_trace) {
  scenario.validate();
  CampaignResult result;
  result.scenario = scenario;
  result.reports.resize(scenario.trials);
  std::vector<std::string> traces(keep_trace ? scenario.trials : 0);

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, scenario.trials));

  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= scenario.trials) return;
      const std::uint64_t seed = scenario.base_seed + k;
      const TrialParams params = scenario.trial_params(seed);
      result.reports[k] = run_trial(params, seed, keep_trace ? &traces[k] : nullptr);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  result.summary = summarize(scenario, result.reports);
  if (keep_trace)
    for (auto& t : traces) result.trace += t;
  return result;
}

std::string report_jsonl(const CampaignResult& result) {
  const Scenario& sc = result.scenario;
  std::string out;
  for (std::size_t k = 0; k < result.reports.size(); ++k) {
    const TrialReport& r = result.reports[k];
    ordered_json j;
    j["trial"] = k;
    j["seed"] = r.seed;
    ordered_json results = ordered_json::array();
    for (const auto& res : r.results) results.push_back(res.str());
    j["results"] = results;
    j["decision_rounds"] = r.decision_round;
    j["final_rounds"] = r.final_round;
    j["async_rounds_at_last_decision"] = r.async_rounds_at_last_decision;
    j["async_rounds_completed"] = r.async_rounds_completed;
    j["recovery_rounds"] = r.recovery_rounds_to_converged;
    j["events"] = r.events;
    j["messages_sent"] = r.messages_sent;
    j["messages_delivered"] = r.messages_delivered;
    j["bytes_sent"] = r.bytes_sent;
    j["malformed_dropped"] = r.malformed_dropped;
    j["transient_error"] = r.any_transient_error;
    j["liveness_budget_exhausted"] = r.liveness_budget_exhausted;
    ordered_json verdicts;
    verdicts["bc_validity"] = verdict_name(r.verdicts.bc_validity);
    verdicts["bc_agreement"] = verdict_name(r.verdicts.bc_agreement);
    verdicts["bc_termination"] = verdict_name(r.verdicts.bc_termination);
    verdicts["bv_validity"] = verdict_name(r.verdicts.bv_validity);
    verdicts["bv_uniformity"] = verdict_name(r.verdicts.bv_uniformity);
    verdicts["bv_termination"] = verdict_name(r.verdicts.bv_termination);
    verdicts["resolved_within_one_round"] = verdict_name(r.verdicts.resolved_within_one_round);
    verdicts["converged_within_o_m"] = verdict_name(r.verdicts.converged_within_o_m);
    verdicts["singleton_agreement"] = verdict_name(r.verdicts.singleton_agreement);
    verdicts["unanimity_persistence"] = verdict_name(r.verdicts.unanimity_persistence);
    verdicts["decision_stability"] = verdict_name(r.verdicts.decision_stability);
    j["verdicts"] = verdicts;
    if (!r.verdicts.counterexample.empty()) j["counterexample"] = r.verdicts.counterexample;
    j["footprint_total_bits"] = r.footprint.total_bits;
    out += j.dump();
    out += '\n';
  }
  const CampaignSummary& s = result.summary;
  ordered_json j;
  j["summary"] = true;
  j["scenario_hash"] = sc.hash();
  j["trials"] = s.trials;
  ordered_json hist;
  for (const auto& [round, count] : s.decision_round_hist) hist[std::to_string(round)] = count;
  j["decision_round_hist"] = hist;
  ordered_json ahist;
  for (const auto& [rounds, count] : s.async_round_hist) ahist[std::to_string(rounds)] = count;
  j["async_round_hist"] = ahist;
  j["mean_decision_round"] = s.mean_decision_round;
  j["p50_decision_round"] = s.p50_decision_round;
  j["p99_decision_round"] = s.p99_decision_round;
  j["mean_async_rounds"] = s.mean_async_rounds;
  j["safety_violations"] = s.safety_violations;
  j["transient_error_trials"] = s.transient_error_trials;
  j["liveness_failures"] = s.liveness_failures;
  ordered_json fails;
  for (const auto& [name, count] : s.oracle_failures) fails[name] = count;
  j["oracle_failures"] = fails;
  j["mean_messages"] = s.mean_messages;
  j["footprint_total_bits"] = s.footprint_total_bits;
  j["footprint_column_bits"] = s.footprint_column_bits;
  j["stabilization_trials"] = s.stabilization_trials;
  j["resolved_pass"] = s.resolved_pass;
  j["converged_pass"] = s.converged_pass;
  out += j.dump();
  out += '\n';
  return out;
}

std::string report_table(const CampaignResult& result) {
  const Scenario& sc = result.scenario;
  const CampaignSummary& s = result.summary;
  std::ostringstream t;
  t << "campaign: n=" << sc.cfg.n << " t=" << sc.cfg.t << " M=" << sc.cfg.m_rounds
    << " variant=" << variant_name(sc.cfg.variant)
    << " adversary=" << adversary_kind_name(sc.faults.strategy.kind)
    << " proposals=" << proposal_rule_name(sc.proposal_rule) << " trials=" << s.trials
    << " seed=" << sc.base_seed << "\n";
  t << "mean decision round: " << s.mean_decision_round
    << "  (p50 " << s.p50_decision_round << ", p99 " << s.p99_decision_round << ")\n";
  t << "mean async rounds at last decision: " << s.mean_async_rounds << "\n";
  t << "safety violations: " << s.safety_violations
    << "  transient-error trials: " << s.transient_error_trials
    << "  liveness failures: " << s.liveness_failures << "\n";
  t << "mean messages per trial: " << s.mean_messages << "\n";
  t << "footprint bits/node: " << s.footprint_total_bits
    << "  per-peer column bits: " << s.footprint_column_bits << "\n";
  if (s.stabilization_trials > 0)
    t << "stabilization: resolved-within-1 " << s.resolved_pass << "/" << s.stabilization_trials
      << ", converged-within-cM " << s.converged_pass << "/" << s.stabilization_trials << "\n";
  t << "decision-round histogram (worst correct node):\n";
  for (const auto& [round, count] : s.decision_round_hist)
    t << "  r=" << round << ": " << count << "\n";
  if (!s.oracle_failures.empty()) {
    t << "oracle failures:\n";
    for (const auto& [name, count] : s.oracle_failures) t << "  " << name << ": " << count << "\n";
  } else {
    t << "oracle failures: none\n";
  }
  return t.str();
}

void emit_report(const CampaignResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("report: cannot write '" + path + "'");
  out << report_jsonl(result);
  if (!out) throw std::runtime_error("report: write failed for '" + path + "'");
  std::ofstream table(path + ".txt", std::ios::binary);
  if (!table) throw std::runtime_error("report: cannot write '" + path + ".txt'");
  table << report_table(result);
}

}  // namespace ssbc
