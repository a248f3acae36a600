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
#include <optional>
#include <vector>

#include "cfmimo/common.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

enum class WishartMoment { tr_inv, tr_inv_sq, quad_form };

/// Moments of W ~ CW(n, I_m): E tr W^{-1}, E tr W^{-2}, E |tr(W^{-1} A)|^2.
double wishart_moment(WishartMoment kind, long n, long m, const std::optional<CMat>& A = std::nullopt);

struct MuFactors {
    double mu1 = 1.0;
    double mu2 = 1.0;
};

MuFactors mu_factors(long n_sigma, long mn);

/// Inputs shared by the closed forms. All quantities are evaluated in
/// noise-normalized units (Lambda' = rho Lambda / sigma2, unit noise), so
/// gammas depend on rho and sigma2 only through their ratio.
struct TheoryParams {
    double rho = 1.0;
    double sigma2 = 1.0;
    int n_sigma = 0;
    int n_lambda = 0;
    /// Oracle covariances: mu1 = mu2 = 1, N_Sigma/(N_Sigma - MN) = 1 and
    /// every 1/N_Sigma, 1/N_Lambda term dropped.
    bool perfect_limit = false;
};

TheoryParams theory_params(const SystemConfig& cfg, const LargeScaleProfile& profile, CovMode mode);

struct MrcClosedForm {
    double desired = 0.0;            // N_Sigma/(N_Sigma - MN) tr(W_k Lambda_k)
    std::vector<double> i_ex;        // one per user, i = 0..K-1
    std::vector<double> i_in;        // one per co-pilot user, group order
    double noise = 0.0;              // N_k
    double gamma = 0.0;
};

std::vector<MrcClosedForm> mrc_closed_form(const LargeScaleProfile& profile, const PilotPlan& plan,
                                           const TheoryParams& params);
std::vector<double> mrc_sinr_closed(const LargeScaleProfile& profile, const PilotPlan& plan,
                                    const SystemConfig& cfg);

/// Large-array MRC limit, evaluated as printed with the 1/rho factor absorbed
/// by the normalization.
struct MrcLimitTerms {
    double numerator = 0.0;
    std::vector<double> contamination; // one per co-pilot user
    std::vector<double> estimation;    // N_Sigma/(2 N_Lambda) tr(Lambda_i Sigma_p), one per user
    double noise = 0.0;                // N_Sigma/(2 N_Lambda) tr(Sigma_p)
    double gamma = 0.0;
};

std::vector<MrcLimitTerms> mrc_limit_terms(const LargeScaleProfile& profile, const PilotPlan& plan,
                                           const TheoryParams& params);
std::vector<double> mrc_sinr_limit(const LargeScaleProfile& profile, const PilotPlan& plan,
                                   const SystemConfig& cfg);

/// Diagonal of the ZF interference matrix. The Wishart term
/// N_Sigma^2 Lambda_k S^{-1} Sigma_p^{-1} S^{-1} Lambda_k, S ~ CW(N_Sigma, I),
/// is replaced by its exact mean
/// mu2 Lambda_k^2 Sigma_p^{-1} + (mu1 / N_Sigma) tr(Sigma_p^{-1}) Lambda_k^2.
RVec zf_gamma_tilde_diag(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& params);
CMat zf_gamma_tilde(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& params);

/// Same matrix with the Wishart term averaged over `samples` draws of
/// S = N_Sigma Sigma_p^{-1/2} Sigma-hat_p Sigma_p^{-1/2}.
CMat zf_gamma_tilde_sampled(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& params,
                            int samples, std::uint64_t seed);

struct ZfGroupForm {
    std::vector<int> users;
    RMat xi;       // |U_p| x |U_p|
    RMat xi_tilde; // |U_p| x |U_p|
};

struct ZfClosedForm {
    std::vector<ZfGroupForm> groups; // one per pilot, empty groups included
    RVec gamma_tilde;                // diagonal of Gamma-tilde
    std::vector<double> gamma;       // per user
};

ZfClosedForm zf_closed_form(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& params);
std::vector<double> zf_sinr_closed(const LargeScaleProfile& profile, const PilotPlan& plan,
                                   const SystemConfig& cfg);

/// Gram-matrix concentration check for one antenna count.
struct GramConcentrationPoint {
    int antennas_per_ap = 0;
    int mn = 0;
    double cross_mean = 0.0;   // mean of ||(1/MN) G_p^H G_i||_F over group pairs p != i
    double cross_stderr = 0.0;
    double in_mean = 0.0;      // mean of ||(1/MN) G_p^H G_p - (1/M) Xi_p||_F over groups
    double in_stderr = 0.0;
};

/// Uses the per-AP gains of `profile` with each antenna count in
/// `antennas_per_ap`, perfect-covariance MMSE estimates and the SNR of
/// `params`.
std::vector<GramConcentrationPoint> lemma2_diagnostics(const LargeScaleProfile& profile, const PilotPlan& plan,
                                            const TheoryParams& params, const std::vector<int>& antennas_per_ap,
                                            long trials, std::uint64_t seed);

} // namespace cfmimo
