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
#include <string>
#include <vector>

#include <json.hpp>

#include "cfmimo/common.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

/// Scalar parameters of one cell-free uplink system.
///
/// Lengths (positions, area diameter) share a single unit equal to the
/// pathloss reference distance. Powers are linear. When `tx_power` is unset
/// it is calibrated per geometry so that the median user's strongest-AP
/// per-antenna receive SNR equals kDefaultMedianSnrDb.
struct SystemConfig {
    int num_aps = 2;            // M
    int antennas_per_ap = 4;    // N
    int num_users = 4;          // K
    int num_pilots = 4;         // P
    int pilot_len = 10;         // tau, pilot symbols per coherent block
    int coherence_len = 200;    // tau_c, symbols per coherent block
    int stationarity_len = 20000; // tau_s, coherent blocks with fixed covariance
    std::optional<double> tx_power; // rho
    double noise_power = 1.0;   // sigma^2
    double pathloss_exponent = 3.7;
    double area_diameter = 1000.0;
    double shadow_std_db = 8.0;
    int n_sigma = 32;           // blocks used for the sample covariance
    int n_lambda = 100;         // block pairs used for the individual covariance
    std::uint64_t master_seed = 1;

    int mn() const { return num_aps * antennas_per_ap; }
};

inline constexpr double kDefaultMedianSnrDb = 10.0;

struct ValidationNeeds {
    bool estimated_covariance = false; // Sigma-hat must be invertible
    bool closed_form = false;          // Wishart moments must exist
};

/// Throws ConfigError naming the first violated invariant.
void validate(const SystemConfig& cfg, ValidationNeeds needs = {});

SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& cfg);
SystemConfig load_config(const std::string& path);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Per-(user, AP) large-scale gains and the geometry that produced them.
/// Lambda_k = diag(lambda_k1..lambda_kM) (x) I_N is kept as its length-MN
/// diagonal; see lambda_diag().
struct LargeScaleProfile {
    RMat gains;                 // K x M, all entries > 0
    std::vector<Point2> ap_positions;
    std::vector<Point2> user_positions;
    int antennas_per_ap = 1;

    int num_users() const { return static_cast<int>(gains.rows()); }
    int num_aps() const { return static_cast<int>(gains.cols()); }
    int mn() const { return num_aps() * antennas_per_ap; }

    /// Diagonal of Lambda_k; entry m*N + n holds lambda_{k,m}.
    RVec lambda_diag(int k) const;
};

std::vector<Point2> place_uniform_disk(int count, double diameter, RandomStream& rng);

/// max(distance, 1)^(-zeta) * 10^(shadow_db / 10).
double large_scale_gain(double distance, double shadow_db, double zeta);

/// Gains from fixed positions; one independent N(0, shadow_std_db) dB draw per link.
LargeScaleProfile profile_from_positions(std::vector<Point2> aps, std::vector<Point2> users,
                                         int antennas_per_ap, double zeta, double shadow_std_db,
                                         RandomStream& rng);

/// APs first, then users, then shadowing (user-major), all from `rng`.
LargeScaleProfile build_profile(const SystemConfig& cfg, RandomStream& rng);

/// Transmit power giving the requested median (over users) strongest-AP SNR.
double calibrate_tx_power(const LargeScaleProfile& profile, double noise_power, double median_snr_db);

/// cfg.tx_power if set, else the kDefaultMedianSnrDb calibration.
double effective_tx_power(const SystemConfig& cfg, const LargeScaleProfile& profile);

} // namespace cfmimo
