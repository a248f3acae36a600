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

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "cfmimo/covariance.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/theory.hpp"
#include "cfmimo/validation.hpp"
#include "oracles.hpp"

using namespace cfmimo;

namespace {

LargeScaleProfile profile_with(const RMat& gains, int N)
{
    LargeScaleProfile p;
    p.gains = gains;
    p.ap_positions.assign(static_cast<std::size_t>(gains.cols()), {});
    p.user_positions.assign(static_cast<std::size_t>(gains.rows()), {});
    p.antennas_per_ap = N;
    return p;
}

CMat random_matrix(int n, RandomStream& rng)
{
    CMat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = rng.complex_normal();
    return A;
}

bool is_psd(const CMat& A, double tol = 1e-10)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(A);
    return es.eigenvalues().minCoeff() >= -tol * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
}

} // namespace

TEST_CASE("perfect received covariance")
{
    const auto one = profile_with(RMat::Ones(1, 1), 3);
    const std::vector<int> g{0};
    CHECK(perfect_received_covariance(one, g, 1.0, 1.0).isApproxToConstant(2.0));

    RMat gains(2, 1);
    gains << 1.0, 3.0;
    const auto two = profile_with(gains, 2);
    const std::vector<int> both{0, 1};
    CHECK(perfect_received_covariance(two, both, 2.0, 1.0).isApproxToConstant(9.0));
    CHECK(perfect_received_covariance(two, {}, 2.0, 0.25).isApproxToConstant(0.25));
}

TEST_CASE("sample covariance")
{
    std::vector<CVec> obs{CVec::Zero(2)};
    obs[0](0) = 1.0;
    const CMat S = sample_covariance(obs);
    CHECK(S(0, 0) == cplx(1.0, 0.0));
    CHECK(S(0, 1) == cplx(0.0, 0.0));
    CHECK(S(1, 1) == cplx(0.0, 0.0));
    CHECK_THROWS_AS(sample_covariance(std::vector<CVec>{}), ConfigError);

    RandomStream rng(1);
    for (int t = 0; t < 20; ++t) {
        CMat Y(6, 5);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 5; ++j) Y(i, j) = rng.complex_normal(3.0);
        const CMat C = sample_covariance(Y);
        CHECK((C - C.adjoint()).norm() == 0.0);
        CHECK(is_psd(C));
    }
}

TEST_CASE("psd projection")
{
    CMat a = CMat::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = -1.0;
    const CMat pa = psd_project(a);
    CHECK(std::abs(pa(0, 0) - 2.0) < 1e-12);
    CHECK(std::abs(pa(1, 1)) < 1e-12);

    CMat b(2, 2);
    b << 1.0, 2.0, 0.0, 1.0;
    CMat ones = CMat::Ones(2, 2);
    CHECK((psd_project(b) - ones).norm() < 1e-12);

    RandomStream rng(2);
    for (int t = 0; t < 20; ++t) {
        const CMat B = random_matrix(5, rng);
        const CMat P = B * B.adjoint();
        CHECK((psd_project(P) - P).norm() / P.norm() < 1e-10);
        const CMat Q = psd_project(B);
        CHECK((Q - Q.adjoint()).norm() == 0.0);
        CHECK(is_psd(Q));
    }
}

TEST_CASE("psd projection is the nearest PSD matrix among random probes")
{
    RandomStream rng(3);
    for (int t = 0; t < 5; ++t) {
        const CMat A = random_matrix(4, rng);
        const CMat H = 0.5 * (A + A.adjoint());
        const double best = (psd_project(A) - H).norm();
        for (int c = 0; c < 1000; ++c) {
            const CMat B = random_matrix(4, rng);
            const CMat cand = B * B.adjoint() * (0.05 + rng.uniform());
            CHECK((cand - H).norm() >= best - 1e-12);
        }
    }
}

TEST_CASE("individual covariance")
{
    RandomStream rng(4);
    CVec g(4);
    for (int i = 0; i < 4; ++i) g(i) = rng.complex_normal();
    const double rho = 2.5;
    const std::vector<std::pair<CVec, CVec>> pairs{{std::sqrt(rho) * g, std::sqrt(rho) * g}};
    const CMat L = individual_covariance(pairs, rho);
    CHECK((L - g * g.adjoint()).norm() < 1e-12);
    CHECK_THROWS_AS(individual_covariance(std::vector<std::pair<CVec, CVec>>{}, 1.0), ConfigError);
    CHECK_THROWS_AS(individual_covariance(pairs, 0.0), ConfigError);
}

TEST_CASE("estimated covariances are Hermitian and positive (semi)definite")
{
    RMat gains(3, 2);
    gains << 1.0, 0.1, 0.4, 2.0, 0.8, 0.3;
    const auto prof = profile_with(gains, 3);
    const auto plan = assign_pilots(3, 2, PilotPolicy::round_robin);
    const auto set = estimate_covariances(prof, plan, {1.5, 1.0, 12, 20}, 77);
    CHECK(set.provenance == CovMode::estimated);
    CHECK(set.n_sigma == 12);
    CHECK(set.n_lambda == 20);
    for (const auto& S : set.sigma_per_pilot) {
        CHECK((S - S.adjoint()).norm() == 0.0);
        CHECK(Eigen::SelfAdjointEigenSolver<CMat>(S).eigenvalues().minCoeff() > 0.0);
    }
    for (const auto& L : set.lambda_per_user) {
        CHECK((L - L.adjoint()).norm() < 1e-14 * std::max(1.0, L.norm()));
        CHECK(is_psd(L));
    }
    const auto again = estimate_covariances(prof, plan, {1.5, 1.0, 12, 20}, 77);
    CHECK(again.sigma_per_pilot[1] == set.sigma_per_pilot[1]);
    CHECK(again.lambda_per_user[2] == set.lambda_per_user[2]);
}

TEST_CASE("estimator bias and consistency")
{
    RMat gains(3, 2);
    gains << 1.0, 0.2, 0.3, 1.5, 0.6, 0.6;
    const auto prof = profile_with(gains, 4);
    const auto plan = assign_pilots(3, 3, PilotPolicy::orthogonal);
    const auto big = estimator_stats(prof, plan, 3.0, 1.0, 500, 400, 200, 5);
    for (double e : big.sigma_mean_rel_err) CHECK(e < 0.05);
    for (double e : big.lambda_mean_rel_err) CHECK(e < 0.10);

    std::vector<double> err;
    for (int nl : {25, 100, 400}) {
        const auto s = estimator_stats(prof, plan, 3.0, 1.0, 16, nl, 50, 6);
        double m = 0.0;
        for (double e : s.lambda_rel_err) m += e;
        err.push_back(m / 3.0);
    }
    CHECK(err[0] > err[1]);
    CHECK(err[1] > err[2]);
}

TEST_CASE("co-pilot interference cancels in the individual covariance")
{
    // Without the phase shifts the co-pilot user (16x the gain) would add 16
    // to every diagonal entry; with them only a zero-mean residual remains.
    RMat gains(2, 1);
    gains << 1.0, 16.0;
    const auto prof = profile_with(gains, 2);
    const auto plan = assign_pilots(2, 1, PilotPolicy::round_robin);
    double m = 0.0;
    const int windows = 40;
    for (int w = 0; w < windows; ++w) {
        const auto set = estimate_covariances(prof, plan, {1.0, 1.0, 2, 2000}, derive_seed(8, {std::uint64_t(w)}));
        m += (set.lambda_per_user[0].diagonal().real().array() - 1.0).mean();
    }
    CHECK(std::abs(m / windows) < 0.1);
}

TEST_CASE("normalized sample covariance behaves like a Wishart matrix")
{
    const CMat A = CMat::Identity(8, 8);
    const auto s = wishart_monte_carlo(64, 8, 4000, A, 12);
    CHECK(s.tr_inv == doctest::Approx(oracle::wishart_tr_inv(64, 8)).epsilon(0.02));
    CHECK(s.tr_inv_sq == doctest::Approx(oracle::wishart_tr_inv_sq(64, 8)).epsilon(0.04));
    CHECK(s.quad == doctest::Approx(oracle::wishart_quad(64, 8, 64.0, 8.0)).epsilon(0.04));
}

TEST_CASE("covariance JSON round trip")
{
    RMat gains(2, 2);
    gains << 1.0, 0.1, 0.4, 2.0;
    const auto prof = profile_with(gains, 2);
    const auto plan = assign_pilots(2, 2, PilotPolicy::orthogonal);
    const auto set = estimate_covariances(prof, plan, {1.0, 1.0, 8, 8}, 3);
    const auto path = (std::filesystem::temp_directory_path() / "cfmimo_cov_test.json").string();
    save_covariance(set, path);
    const auto back = load_covariance(path);
    std::filesystem::remove(path);
    CHECK(back.provenance == set.provenance);
    CHECK(back.n_sigma == 8);
    for (std::size_t p = 0; p < 2; ++p) CHECK(back.sigma_per_pilot[p] == set.sigma_per_pilot[p]);
    for (std::size_t k = 0; k < 2; ++k) CHECK(back.lambda_per_user[k] == set.lambda_per_user[k]);
}
