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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfmimo/common.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// Sigma_p per pilot group and Lambda_k per user, either the oracle values or
/// estimates from one stationarity window.
struct CovarianceSet {
    std::vector<CMat> sigma_per_pilot;
    std::vector<CMat> lambda_per_user;
    CovMode provenance = CovMode::perfect;
    int n_sigma = 0;  // 0 for oracle sets
    int n_lambda = 0; // 0 for oracle sets
};

/// Diagonal of Sigma_p = rho (sum_{i in group} Lambda_i + sigma2/rho I).
RVec perfect_received_covariance(const LargeScaleProfile& profile, std::span<const int> group,
                                 double rho, double sigma2);

/// (1/N) sum_n y_n y_n^H. Throws ConfigError on an empty list.
CMat sample_covariance(std::span<const CVec> observations);
/// Columns of Y are the observations.
CMat sample_covariance(const CMat& Y);

/// Frobenius-nearest Hermitian PSD matrix to (A + A^H)/2.
CMat psd_project(const CMat& A);

/// psd_project((1 / (2 N rho)) sum_n (h1 h2^H + h2 h1^H)), where h1 is the
/// plain-block observation and h2 the derotated shifted-block observation of
/// the same block pair.
CMat individual_covariance(std::span<const std::pair<CVec, CVec>> pairs, double rho);
/// Columns of H1/H2 are the paired observations.
CMat individual_covariance(const CMat& H1, const CMat& H2, double rho);

CovarianceSet perfect_covariance_set(const LargeScaleProfile& profile, const PilotPlan& plan,
                                     double rho, double sigma2);

struct WindowParams {
    double rho = 1.0;
    double sigma2 = 1.0;
    int n_sigma = 1;
    int n_lambda = 1;
};

/// Simulates one stationarity window of alternating plain / phase-shifted
/// pilot blocks and returns the estimated covariances.
///
/// Block pair n (blocks 2n-1 and 2n) shares one small-scale realization.
/// The plain blocks of the first n_sigma pairs feed Sigma-hat_p, and the
/// first n_lambda pairs feed Lambda-hat_k. Randomness is split into three
/// streams derived from `window_seed` (channel + plain noise, shifted noise,
/// phases) so windows that differ only in n_sigma / n_lambda share their
/// common prefix of blocks.
CovarianceSet estimate_covariances(const LargeScaleProfile& profile, const PilotPlan& plan,
                                   const WindowParams& params, std::uint64_t window_seed);

nlohmann::json covariance_to_json(const CovarianceSet& set);
CovarianceSet covariance_from_json(const nlohmann::json& j);
void save_covariance(const CovarianceSet& set, const std::string& path);
CovarianceSet load_covariance(const std::string& path);

} // namespace cfmimo
