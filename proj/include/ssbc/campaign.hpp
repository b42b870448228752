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
#include <map>
#include <string>
#include <vector>

#include "ssbc/engine.hpp"
#include "ssbc/scenario.hpp"

namespace ssbc {

/// Aggregate over all trials of one scenario. Histogram counts sum to the
/// trial count; statistics cover correct nodes only.
struct CampaignSummary {
  std::uint64_t trials = 0;
  std::map<std::int32_t, std::uint64_t> decision_round_hist;  // worst correct round, -1 = none
  std::map<std::uint64_t, std::uint64_t> async_round_hist;
  double mean_decision_round = 0.0;
  double p50_decision_round = 0.0;
  double p99_decision_round = 0.0;
  double mean_async_rounds = 0.0;
  std::uint64_t safety_violations = 0;  // bc_validity or bc_agreement failures
  std::uint64_t transient_error_trials = 0;
  std::uint64_t liveness_failures = 0;
  std::map<std::string, std::uint64_t> oracle_failures;
  std::uint64_t oracle_evaluations = 0;
  double mean_messages = 0.0;
  std::uint64_t footprint_total_bits = 0;
  std::uint64_t footprint_column_bits = 0;
  std::uint64_t stabilization_trials = 0;
  std::uint64_t resolved_pass = 0;
  std::uint64_t converged_pass = 0;
};

struct CampaignResult {
  Scenario scenario;
  std::vector<TrialReport> reports;
  CampaignSummary summary;
  std::string trace;  // nonempty when tracing was requested
};

/// Runs scenario.trials trials on a worker pool with seeds
/// base_seed..base_seed+trials-1. Aggregation is order independent.
CampaignResult run_campaign(const Scenario& scenario, unsigned jobs = 0, bool keep_trace = false);

CampaignSummary summarize(const Scenario& scenario, const std::vector<TrialReport>& reports);

/// Writes one JSON object per line: trial records, then a summary record.
/// A human-readable table lands next to it at path + ".txt".
void emit_report(const CampaignResult& result, const std::string& path);

/// The JSONL payload alone (used by emit_report and the determinism tests).
std::string report_jsonl(const CampaignResult& result);
std::string report_table(const CampaignResult& result);

}  // namespace ssbc
