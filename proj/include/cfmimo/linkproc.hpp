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
#include <vector>

#include "cfmimo/common.hpp"
#include "cfmimo/covariance.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// g_hat = sqrt(rho) Lambda_k Sigma_p^{-1} y, all diagonals.
CVec mmse_estimate_perfect(const CVec& y, const RVec& lambda_k, const RVec& sigma_p, double rho);

struct ImperfectEstimate {
    CVec g_hat;
    CMat W_hat; // Lambda-hat_k Sigma-hat_p^{-1}
};

/// W_hat = Lambda_hat Sigma_hat^{-1}, g_hat = W_hat y. The estimated
/// individual covariance already carries the 1/rho normalization, so no
/// sqrt(rho) factor appears here.
ImperfectEstimate mmse_estimate_imperfect(const CVec& y, const CMat& lambda_hat, const CMat& sigma_hat);

/// Lambda_hat Sigma_hat^{-1}; throws NumericalError when Sigma_hat is not
/// positive definite.
CMat estimator_matrix(const CMat& lambda_hat, const CMat& sigma_hat);

/// Per-user estimator matrices W_k. Oracle banks stay diagonal.
struct EstimatorBank {
    CovMode provenance = CovMode::perfect;
    std::vector<RVec> diag;  // perfect: diagonal of sqrt(rho) Lambda_k Sigma_p^{-1}
    std::vector<CMat> dense; // estimated: Lambda-hat_k Sigma-hat_p^{-1}
};

EstimatorBank perfect_estimators(const LargeScaleProfile& profile, const PilotPlan& plan, double rho,
                                 double sigma2);
EstimatorBank estimated_estimators(const CovarianceSet& set, const PilotPlan& plan);

struct EstimatedChannels {
    CMat G_hat; // MN x K
    CovMode covariance_provenance = CovMode::perfect;
};

/// g_hat_k = W_k y_{p(k)}; column p of Y holds the observation of pilot p.
EstimatedChannels estimate_channels(const EstimatorBank& bank, const PilotPlan& plan, const CMat& Y);

/// MRC returns G_hat; ZF returns G_hat (G_hat^H G_hat)^{-1}.
CMat combiner(const CMat& G_hat, Scheme scheme);

inline constexpr double kZfConditionLimit = 1e12;

/// Monte Carlo estimate of the use-and-then-forget SINR of one user,
///   gamma = rho |E[w^H g_k]|^2 / (rho sum_i E|w^H g_i|^2 - rho |E[w^H g_k]|^2 + sigma2 E[w^H w]).
/// Powers are stored already scaled by rho (desired, total) and sigma2 (noise).
struct SinrEstimate {
    double desired_power = 0.0;
    double total_power = 0.0;
    double noise_term = 0.0;
    double gamma = 0.0;
    double std_error = 0.0; // delta-method standard error of gamma
    long trials = 0;        // trials that contributed
    long skipped = 0;       // trials dropped because the combiner failed
};

struct UatfSettings {
    std::vector<Scheme> schemes{Scheme::mrc};
    CovMode cov_mode = CovMode::perfect;
    long trials = 1000;
    double rho = 1.0;
    double sigma2 = 1.0;
    int n_sigma = 1;  // estimated mode only
    int n_lambda = 1; // estimated mode only
    std::uint64_t seed = 0;
};

enum class Execution { parallel, serial };

/// result[s][k] is the estimate for settings.schemes[s] and user k.
///
/// Each trial draws a fresh stationarity window (estimated mode), then one
/// payload block. Trial t uses streams derived from (seed, t) only, so the
/// result does not depend on the worker count. Execution::serial is the
/// plain reference loop; Execution::parallel splits trials into fixed blocks
/// reduced pairwise. Throws NumericalError when more than 1% of the trials
/// of a scheme fail.
std::vector<std::vector<SinrEstimate>> uatf_monte_carlo(const LargeScaleProfile& profile,
                                                         const PilotPlan& plan,
                                                         const UatfSettings& settings,
                                                         Execution exec = Execution::parallel);

/// Single-scheme convenience wrapper using the config's noise power,
/// N_Sigma, N_Lambda and (calibrated) transmit power.
std::vector<SinrEstimate> uatf_sinr_monte_carlo(const SystemConfig& config, const LargeScaleProfile& profile,
                                                const PilotPlan& plan, Scheme scheme, CovMode cov_mode,
                                                long trials, std::uint64_t seed);

/// (1 - pilot_symbols / tau_c) log2(1 + gamma).
double achievable_rate(double gamma, int pilot_symbols, int tau_c);

} // namespace cfmimo
