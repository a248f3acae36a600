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

#include "cfmimo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace cfmimo {

namespace {

void require(bool ok, const std::string& msg)
{
    if (!ok) throw ConfigError(msg);
}

} // namespace

void validate(const SystemConfig& c, ValidationNeeds needs)
{
    require(c.num_aps >= 1, "num_aps must be positive");
    require(c.antennas_per_ap >= 1, "antennas_per_ap must be positive");
    require(c.num_users >= 1, "num_users must be positive");
    require(c.num_pilots >= 1, "num_pilots must be positive");
    require(c.pilot_len >= 1, "pilot_len must be positive");
    require(c.coherence_len >= 1, "coherence_len must be positive");
    require(c.stationarity_len >= 1, "stationarity_len must be positive");
    require(c.n_sigma >= 1, "n_sigma must be positive");
    require(c.n_lambda >= 1, "n_lambda must be positive");
    require(!c.tx_power || *c.tx_power > 0.0, "tx_power must be positive");
    require(c.noise_power > 0.0, "noise_power must be positive");
    require(c.pathloss_exponent > 0.0, "pathloss_exponent must be positive");
    require(c.area_diameter > 0.0, "area_diameter must be positive");
    require(c.shadow_std_db >= 0.0, "shadow_std_db must be nonnegative");
    require(c.pilot_len >= c.num_pilots,
            "pilot_len >= num_pilots is required (P orthogonal sequences of length tau)");
    require(c.coherence_len > c.pilot_len, "coherence_len > pilot_len is required");
    require(2 * (c.n_sigma + c.n_lambda) <= c.stationarity_len,
            "2 * (n_sigma + n_lambda) <= stationarity_len is required");
    if (needs.estimated_covariance)
        require(c.n_sigma >= c.mn(),
                "n_sigma >= M*N is required for an invertible sample covariance (got n_sigma=" +
                    std::to_string(c.n_sigma) + ", M*N=" + std::to_string(c.mn()) + ")");
    if (needs.closed_form)
        require(c.n_sigma > c.mn() + 1,
                "n_sigma > M*N + 1 is required for the closed-form expressions (got n_sigma=" +
                    std::to_string(c.n_sigma) + ", M*N=" + std::to_string(c.mn()) + ")");
}

SystemConfig config_from_json(const nlohmann::json& j)
{
    static const std::set<std::string> known = {
        "num_aps", "antennas_per_ap", "num_users", "num_pilots", "pilot_len", "coherence_len",
        "stationarity_len", "tx_power", "noise_power", "pathloss_exponent", "area_diameter",
        "shadow_std_db", "n_sigma", "n_lambda", "master_seed"};
    if (!j.is_object()) throw ConfigError("system config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown system config field '" + key + "'");

    SystemConfig c;
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        get("num_aps", c.num_aps);
        get("antennas_per_ap", c.antennas_per_ap);
        get("num_users", c.num_users);
        get("num_pilots", c.num_pilots);
        get("pilot_len", c.pilot_len);
        get("coherence_len", c.coherence_len);
        get("stationarity_len", c.stationarity_len);
        if (j.contains("tx_power") && !j.at("tx_power").is_null())
            c.tx_power = j.at("tx_power").get<double>();
        get("noise_power", c.noise_power);
        get("pathloss_exponent", c.pathloss_exponent);
        get("area_diameter", c.area_diameter);
        get("shadow_std_db", c.shadow_std_db);
        get("n_sigma", c.n_sigma);
        get("n_lambda", c.n_lambda);
        get("master_seed", c.master_seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed system config: ") + e.what());
    }
    return c;
}

nlohmann::json config_to_json(const SystemConfig& c)
{
    nlohmann::json j = {
        {"num_aps", c.num_aps},
        {"antennas_per_ap", c.antennas_per_ap},
        {"num_users", c.num_users},
        {"num_pilots", c.num_pilots},
        {"pilot_len", c.pilot_len},
        {"coherence_len", c.coherence_len},
        {"stationarity_len", c.stationarity_len},
        {"noise_power", c.noise_power},
        {"pathloss_exponent", c.pathloss_exponent},
        {"area_diameter", c.area_diameter},
        {"shadow_std_db", c.shadow_std_db},
        {"n_sigma", c.n_sigma},
        {"n_lambda", c.n_lambda},
        {"master_seed", c.master_seed},
    };
    j["tx_power"] = c.tx_power ? nlohmann::json(*c.tx_power) : nlohmann::json(nullptr);
    return j;
}

SystemConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

RVec LargeScaleProfile::lambda_diag(int k) const
{
    RVec d(mn());
    for (int m = 0; m < num_aps(); ++m)
        d.segment(m * antennas_per_ap, antennas_per_ap).setConstant(gains(k, m));
    return d;
}

std::vector<Point2> place_uniform_disk(int count, double diameter, RandomStream& rng)
{
    if (!(diameter > 0.0)) throw ConfigError("disk diameter must be positive");
    const double radius = 0.5 * diameter;
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) {
        const double r = radius * std::sqrt(rng.uniform());
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        pts.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return pts;
}

double large_scale_gain(double distance, double shadow_db, double zeta)
{
    const double d = std::max(distance, 1.0);
    return std::pow(d, -zeta) * std::pow(10.0, shadow_db / 10.0);
}

LargeScaleProfile profile_from_positions(std::vector<Point2> aps, std::vector<Point2> users,
                                         int antennas_per_ap, double zeta, double shadow_std_db,
                                         RandomStream& rng)
{
    LargeScaleProfile p;
    p.antennas_per_ap = antennas_per_ap;
    p.gains.resize(static_cast<Eigen::Index>(users.size()), static_cast<Eigen::Index>(aps.size()));
    for (std::size_t k = 0; k < users.size(); ++k)
        for (std::size_t m = 0; m < aps.size(); ++m) {
            const double d = std::hypot(users[k].x - aps[m].x, users[k].y - aps[m].y);
            const double shadow = shadow_std_db > 0.0 ? shadow_std_db * rng.normal() : 0.0;
            p.gains(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) =
                large_scale_gain(d, shadow, zeta);
        }
    p.ap_positions = std::move(aps);
    p.user_positions = std::move(users);
    return p;
}

LargeScaleProfile build_profile(const SystemConfig& cfg, RandomStream& rng)
{
    auto aps = place_uniform_disk(cfg.num_aps, cfg.area_diameter, rng);
    auto users = place_uniform_disk(cfg.num_users, cfg.area_diameter, rng);
    return profile_from_positions(std::move(aps), std::move(users), cfg.antennas_per_ap,
                                  cfg.pathloss_exponent, cfg.shadow_std_db, rng);
}

double calibrate_tx_power(const LargeScaleProfile& profile, double noise_power, double median_snr_db)
{
    std::vector<double> best(static_cast<std::size_t>(profile.num_users()));
    for (int k = 0; k < profile.num_users(); ++k) best[static_cast<std::size_t>(k)] = profile.gains.row(k).maxCoeff();
    std::sort(best.begin(), best.end());
    const std::size_t n = best.size();
    const double median = n % 2 ? best[n / 2] : 0.5 * (best[n / 2 - 1] + best[n / 2]);
    return noise_power * std::pow(10.0, median_snr_db / 10.0) / median;
}

double effective_tx_power(const SystemConfig& cfg, const LargeScaleProfile& profile)
{
    return cfg.tx_power ? *cfg.tx_power
                        : calibrate_tx_power(profile, cfg.noise_power, kDefaultMedianSnrDb);
}

} // namespace cfmimo
