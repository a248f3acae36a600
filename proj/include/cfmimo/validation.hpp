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

#include "cfmimo/common.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// Monte Carlo means of tr W^{-1}, tr W^{-2} and |tr(W^{-1} A)|^2 where
/// W = n Sigma^{-1/2} Sigma-hat Sigma^{-1/2} is built from n draws of
/// CN(0, Sigma) with a random diagonal Sigma.
struct WishartSample {
    double tr_inv = 0.0;
    double tr_inv_sq = 0.0;
    double quad = 0.0;
};

WishartSample wishart_monte_carlo(long n, long m, long samples, const CMat& A, std::uint64_t seed);

/// Monte Carlo mean of g g^H A g g^H for g ~ CN(0, I).
CMat rank_one_fourth_moment(const CMat& A, long draws, std::uint64_t seed);

/// Bias and error of the covariance estimators over independent windows.
struct EstimatorStats {
    std::vector<double> sigma_mean_rel_err;  // ||mean Sigma-hat_p - Sigma_p||_F / ||Sigma_p||_F, per pilot
    std::vector<double> lambda_mean_rel_err; // ||mean Lambda-hat_k - Lambda_k||_F / ||Lambda_k||_F, per user
    std::vector<double> lambda_rel_err;      // mean over windows of ||Lambda-hat_k - Lambda_k||_F / ||Lambda_k||_F
};

EstimatorStats estimator_stats(const LargeScaleProfile& profile, const PilotPlan& plan, double rho, double sigma2,
                               int n_sigma, int n_lambda, int windows, std::uint64_t seed);

/// Worst-case residuals of the combiner identities over random full-rank G_hat.
struct CombinerStats {
    double zf_identity = 0.0;  // max ||G_hat^H Z - I||_F
    double zf_nulling = 0.0;   // max |z_k^H g_hat_i|, i != k
    double mrc_identity = 0.0; // max ||MRC(G_hat) - G_hat||_F
};

CombinerStats combiner_stats(int mn, int k, int cases, std::uint64_t seed);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// The property suite behind `cfmimo check`.
std::vector<CheckResult> run_checks(std::uint64_t seed);

} // namespace cfmimo
