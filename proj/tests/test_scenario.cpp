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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfmimo/rng.hpp"
#include "cfmimo/scenario.hpp"
#include "oracles.hpp"

using namespace cfmimo;

TEST_CASE("uniform disk placement")
{
    RandomStream rng(3);
    CHECK(place_uniform_disk(0, 1000.0, rng).empty());

    RandomStream a(11), b(11);
    const auto pa = place_uniform_disk(10000, 1000.0, a);
    const auto pb = place_uniform_disk(10000, 1000.0, b);
    double mean_r = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].x == pb[i].x);
        CHECK(pa[i].y == pb[i].y);
        const double r = std::hypot(pa[i].x, pa[i].y);
        CHECK(r <= 500.0);
        mean_r += r;
    }
    mean_r /= static_cast<double>(pa.size());
    CHECK(std::abs(mean_r - 1000.0 / 3.0) / (1000.0 / 3.0) < 0.03);
}

TEST_CASE("disk placement passes a chi-square test over equal-area annuli")
{
    RandomStream rng(2024);
    const int n = 100000;
    const double R = 1.0;
    const auto pts = place_uniform_disk(n, 2.0 * R, rng);
    std::vector<int> counts(8, 0);
    for (const auto& p : pts) {
        const double r = std::hypot(p.x, p.y);
        int bin = 0;
        while (bin < 7 && oracle::disk_radius_cdf(r, R) > (bin + 1) / 8.0) ++bin;
        ++counts[static_cast<std::size_t>(bin)];
    }
    const double expected = n / 8.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < oracle::kChi2_7_999);
}

TEST_CASE("large-scale gain")
{
    CHECK(large_scale_gain(1.0, 0.0, 3.7) == doctest::Approx(1.0));
    CHECK(large_scale_gain(2.0, 0.0, 3.7) == doctest::Approx(0.07697).epsilon(1e-4));
    CHECK(large_scale_gain(0.5, 0.0, 3.7) == doctest::Approx(1.0));
    CHECK(large_scale_gain(0.0, 0.0, 3.7) == doctest::Approx(1.0));
    CHECK(large_scale_gain(1.0, 10.0, 3.7) == doctest::Approx(10.0));

    RandomStream rng(5);
    for (int t = 0; t < 1000; ++t) {
        const double d = 1.0 + 100.0 * rng.uniform();
        const double s = -20.0 + 40.0 * rng.uniform();
        CHECK(large_scale_gain(d * (1.0 + rng.uniform()), s, 3.7) <= large_scale_gain(d, s, 3.7));
        CHECK(large_scale_gain(d, s + 0.1, 3.7) > large_scale_gain(d, s, 3.7));
    }
}

TEST_CASE("profile construction")
{
    RandomStream rng(1);
    auto prof = profile_from_positions({{0.0, 0.0}}, {{1.0, 0.0}}, 4, 3.7, 0.0, rng);
    CHECK(prof.gains(0, 0) == doctest::Approx(1.0));
    CHECK(prof.lambda_diag(0).size() == 4);

    SystemConfig cfg;
    cfg.num_aps = 5;
    cfg.antennas_per_ap = 50;
    cfg.num_users = 5;
    cfg.num_pilots = 5;
    RandomStream a(9), b(9);
    const auto p1 = build_profile(cfg, a);
    const auto p2 = build_profile(cfg, b);
    CHECK(p1.gains.rows() == 5);
    CHECK(p1.gains.cols() == 5);
    CHECK((p1.gains.array() > 0.0).all());
    CHECK(p1.gains == p2.gains);

    // Lambda_k diagonal layout: entry m*N + n holds lambda_{k,m}.
    const RVec d = p1.lambda_diag(2);
    for (int m = 0; m < 5; ++m)
        for (int n = 0; n < 50; ++n) CHECK(d(m * 50 + n) == p1.gains(2, m));
}

TEST_CASE("zero shadowing makes gains a pure function of positions")
{
    RandomStream a(1), b(2);
    const std::vector<Point2> aps{{0.0, 0.0}, {30.0, 40.0}};
    const std::vector<Point2> users{{3.0, 4.0}, {-6.0, 8.0}, {0.2, 0.1}};
    const auto p1 = profile_from_positions(aps, users, 2, 3.0, 0.0, a);
    const auto p2 = profile_from_positions(aps, users, 2, 3.0, 0.0, b);
    CHECK(p1.gains == p2.gains);
    CHECK(p1.gains(0, 0) == doctest::Approx(std::pow(5.0, -3.0)));
    CHECK(p1.gains(0, 1) == doctest::Approx(std::pow(std::hypot(27.0, 36.0), -3.0)));
    CHECK(p1.gains(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("config validation")
{
    SystemConfig c;
    CHECK_NOTHROW(validate(c));
    c.pilot_len = 3;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SystemConfig{};
    c.coherence_len = c.pilot_len;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SystemConfig{};
    c.n_sigma = c.stationarity_len / 2 + 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SystemConfig{};
    c.n_lambda = c.stationarity_len / 2 + 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SystemConfig{};
    c.n_sigma = c.stationarity_len / 4 + 1;
    c.n_lambda = c.stationarity_len / 4;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c.n_sigma -= 1;
    CHECK_NOTHROW(validate(c));
    c = SystemConfig{};
    c.noise_power = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SystemConfig{};
    c.tx_power = -1.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SystemConfig{};
    c.pathloss_exponent = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = SystemConfig{};
    c.n_sigma = c.mn() - 1;
    CHECK_NOTHROW(validate(c));
    CHECK_THROWS_AS(validate(c, {true, false}), ConfigError);
    c.n_sigma = c.mn() + 1;
    CHECK_NOTHROW(validate(c, {true, false}));
    CHECK_THROWS_AS(validate(c, {false, true}), ConfigError);
    c.n_sigma = c.mn() + 2;
    CHECK_NOTHROW(validate(c, {true, true}));
}

TEST_CASE("config JSON")
{
    SystemConfig c;
    c.num_aps = 3;
    c.tx_power = 2.5;
    c.master_seed = 0xffffffffffffffffULL;
    const SystemConfig back = config_from_json(config_to_json(c));
    CHECK(back.num_aps == 3);
    CHECK(back.tx_power.value() == 2.5);
    CHECK(back.master_seed == c.master_seed);

    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"num_ap", 3}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"num_aps", "three"}}), ConfigError);
    CHECK_FALSE(config_from_json(nlohmann::json{{"tx_power", nullptr}}).tx_power.has_value());
}

TEST_CASE("transmit power calibration hits the median SNR")
{
    SystemConfig cfg;
    cfg.num_users = 7;
    RandomStream rng(4);
    const auto prof = build_profile(cfg, rng);
    const double rho = calibrate_tx_power(prof, 2.0, 10.0);
    std::vector<double> best;
    for (int k = 0; k < prof.num_users(); ++k) best.push_back(prof.gains.row(k).maxCoeff() * rho / 2.0);
    std::sort(best.begin(), best.end());
    CHECK(best[3] == doctest::Approx(10.0));
    CHECK(effective_tx_power(cfg, prof) == doctest::Approx(calibrate_tx_power(prof, 1.0, kDefaultMedianSnrDb)));
}
