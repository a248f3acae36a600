// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: cell-free massive MIMO uplink simulation and analysis
// Copyright (C) 2026 The cfmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfmimo/common.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

enum class SweepVariable { n_lambda, n_sigma, num_pilots, snr_db };

const char* to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& s);

struct ExperimentSpec {
    SystemConfig base;
    SweepVariable sweep_variable = SweepVariable::n_lambda;
    std::vector<double> sweep_values{100.0};
    std::vector<Scheme> schemes{Scheme::mrc};
    std::vector<CovMode> cov_modes{CovMode::estimated};
    bool include_theory = false;
    bool include_simulation = true;
    long trials = 1000;
    int num_drops = 1;
};

/// Throws ConfigError on an empty or non-increasing sweep, trials < 1,
/// num_drops < 1, empty scheme/mode lists or non-integral count values.
void validate_spec(const ExperimentSpec& spec);

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::string& path);

/// M=5, N=50, K=5 with N_Sigma = 1000; expect hours of runtime.
ExperimentSpec full_scale_spec(const ExperimentSpec& spec);

enum class Source { simulated, theoretical };

const char* to_string(Source s);
Source parse_source(const std::string& s);

struct ReportRow {
    double sweep_value = 0.0;
    Scheme scheme = Scheme::mrc;
    CovMode cov_mode = CovMode::perfect;
    Source source = Source::simulated;
    std::vector<double> gamma;     // per user, averaged over drops
    std::vector<double> rate;      // per user, averaged over drops
    std::vector<double> std_error; // per user Monte Carlo standard error of gamma; 0 for theory
    double sum_rate = 0.0;         // sum of rate, in user order
    std::uint64_t seed = 0;

    double mean_rate() const { return rate.empty() ? 0.0 : sum_rate / static_cast<double>(rate.size()); }
};

struct AbsentRow {
    double sweep_value = 0.0;
    Scheme scheme = Scheme::mrc;
    CovMode cov_mode = CovMode::perfect;
    Source source = Source::simulated;
    std::string reason;
};

struct SinrReport {
    std::string sweep_variable = "n_lambda";
    std::vector<ReportRow> rows;      // sorted by (sweep_value, scheme, cov_mode, source)
    std::vector<AbsentRow> absent;    // same ordering
    std::vector<double> wall_time;    // seconds, one per row; not part of the data
};

bool same_data(const SinrReport& a, const SinrReport& b);

/// Deterministic given spec.base.master_seed. Geometry of drop d depends on
/// (master_seed, d) only; Monte Carlo streams depend on (master_seed, d) as
/// well, so all sweep points share common random numbers.
SinrReport run_sweep(const ExperimentSpec& spec);

const ReportRow* find_row(const SinrReport& report, double sweep_value, Scheme scheme, CovMode mode, Source source);

enum class ReportFormat { csv, json };

ReportFormat parse_format(const std::string& s);

std::string report_to_csv(const SinrReport& report);
nlohmann::json report_to_json(const SinrReport& report);
SinrReport report_from_json(const nlohmann::json& j);

/// Writes `path`; throws std::runtime_error naming the path on I/O failure.
void emit_report(const SinrReport& report, const std::string& path, ReportFormat format);
SinrReport parse_report_json(const std::string& path);

} // namespace cfmimo
