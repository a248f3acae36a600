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

#include "cfmimo/validation.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "cfmimo/covariance.hpp"
#include "cfmimo/linkproc.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/theory.hpp"

namespace cfmimo {

WishartSample wishart_monte_carlo(long n, long m, long samples, const CMat& A, std::uint64_t seed)
{
    if (n < m || m < 1 || samples < 1) throw ConfigError("wishart_monte_carlo needs n >= m >= 1 and samples >= 1");
    if (A.rows() != m || A.cols() != m) throw ConfigError("A must be m x m");

    RandomStream srng(derive_seed(seed, {0}));
    RVec sigma(m);
    for (long i = 0; i < m; ++i) sigma(i) = 0.5 + 2.0 * srng.uniform();
    const RVec isq = sigma.cwiseSqrt().cwiseInverse();

    std::vector<std::array<double, 3>> vals(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(static)
    for (long t = 0; t < samples; ++t) {
        RandomStream rng(derive_seed(seed, {1, static_cast<std::uint64_t>(t)}));
        CMat Y(m, n);
        for (long j = 0; j < n; ++j)
            for (long i = 0; i < m; ++i) Y(i, j) = rng.complex_normal(sigma(i));
        const CMat W = static_cast<double>(n) * isq.cast<cplx>().asDiagonal() * sample_covariance(Y) *
                       isq.cast<cplx>().asDiagonal();
        const CMat Wi = Eigen::LLT<CMat>(W).solve(CMat::Identity(m, m));
        vals[static_cast<std::size_t>(t)] = {Wi.trace().real(), Wi.squaredNorm(), std::norm((Wi * A).trace())};
    }
    WishartSample s;
    for (const auto& v : vals) {
        s.tr_inv += v[0];
        s.tr_inv_sq += v[1];
        s.quad += v[2];
    }
    const double N = static_cast<double>(samples);
    s.tr_inv /= N;
    s.tr_inv_sq /= N;
    s.quad /= N;
    return s;
}

CMat rank_one_fourth_moment(const CMat& A, long draws, std::uint64_t seed)
{
    const auto m = A.rows();
    RandomStream rng(seed);
    CMat acc = CMat::Zero(m, m);
    CVec g(m);
    for (long t = 0; t < draws; ++t) {
        for (Eigen::Index i = 0; i < m; ++i) g(i) = rng.complex_normal();
        const cplx q = g.dot(A * g); // g^H A g
        acc.noalias() += q * (g * g.adjoint());
    }
    return acc / static_cast<double>(draws);
}

EstimatorStats estimator_stats(const LargeScaleProfile& profile, const PilotPlan& plan, double rho, double sigma2,
                               int n_sigma, int n_lambda, int windows, std::uint64_t seed)
{
    if (windows < 1) throw ConfigError("windows must be >= 1");
    const int K = profile.num_users();
    const int P = plan.num_pilots();
    const CovarianceSet oracle = perfect_covariance_set(profile, plan, rho, sigma2);
    const WindowParams wp{rho, sigma2, n_sigma, n_lambda};

    std::vector<CovarianceSet> sets(static_cast<std::size_t>(windows));
#pragma omp parallel for schedule(dynamic)
    for (int w = 0; w < windows; ++w)
        sets[static_cast<std::size_t>(w)] =
            estimate_covariances(profile, plan, wp, derive_seed(seed, {static_cast<std::uint64_t>(w)}));

    EstimatorStats st;
    for (int p = 0; p < P; ++p) {
        const auto ps = static_cast<std::size_t>(p);
        CMat mean = CMat::Zero(profile.mn(), profile.mn());
        for (const auto& s : sets) mean += s.sigma_per_pilot[ps];
        mean /= static_cast<double>(windows);
        st.sigma_mean_rel_err.push_back((mean - oracle.sigma_per_pilot[ps]).norm() /
                                        oracle.sigma_per_pilot[ps].norm());
    }
    for (int k = 0; k < K; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const CMat& truth = oracle.lambda_per_user[ks];
        CMat mean = CMat::Zero(profile.mn(), profile.mn());
        double err = 0.0;
        for (const auto& s : sets) {
            mean += s.lambda_per_user[ks];
            err += (s.lambda_per_user[ks] - truth).norm() / truth.norm();
        }
        mean /= static_cast<double>(windows);
        st.lambda_mean_rel_err.push_back((mean - truth).norm() / truth.norm());
        st.lambda_rel_err.push_back(err / windows);
    }
    return st;
}

CombinerStats combiner_stats(int mn, int k, int cases, std::uint64_t seed)
{
    if (k > mn) throw ConfigError("combiner_stats needs k <= mn");
    RandomStream rng(seed);
    CombinerStats st;
    for (int c = 0; c < cases; ++c) {
        CMat G(mn, k);
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < mn; ++i) G(i, j) = rng.complex_normal(std::exp(rng.normal()));
        const CMat Z = combiner(G, Scheme::zf);
        const CMat I = G.adjoint() * Z;
        st.zf_identity = std::max(st.zf_identity, (I - CMat::Identity(k, k)).norm());
        const CMat Zg = Z.adjoint() * G;
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                if (a != b) st.zf_nulling = std::max(st.zf_nulling, std::abs(Zg(a, b)));
        st.mrc_identity = std::max(st.mrc_identity, (combiner(G, Scheme::mrc) - G).norm());
    }
    return st;
}

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

CheckResult make(std::string name, bool ok, const std::string& detail) { return {std::move(name), ok, detail}; }

} // namespace

std::vector<CheckResult> run_checks(std::uint64_t seed)
{
    std::vector<CheckResult> out;

    {
        const long n = 64, m = 8;
        RandomStream rng(derive_seed(seed, {1}));
        CMat B(m, m);
        for (long i = 0; i < m; ++i)
            for (long j = 0; j < m; ++j) B(i, j) = rng.complex_normal();
        const CMat A = 0.5 * (B + B.adjoint());
        const WishartSample s = wishart_monte_carlo(n, m, 20000, A, derive_seed(seed, {2}));
        const double e1 = rel(s.tr_inv, wishart_moment(WishartMoment::tr_inv, n, m));
        const double e2 = rel(s.tr_inv_sq, wishart_moment(WishartMoment::tr_inv_sq, n, m));
        const double e3 = rel(s.quad, wishart_moment(WishartMoment::quad_form, n, m, A));
        std::ostringstream d;
        d << "relative errors " << e1 << ", " << e2 << ", " << e3 << " (limit 0.02)";
        out.push_back(make("wishart moments", e1 < 0.02 && e2 < 0.02 && e3 < 0.02, d.str()));
    }
    {
        RandomStream rng(derive_seed(seed, {3}));
        CMat A(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) A(i, j) = rng.complex_normal();
        const CMat mc = rank_one_fourth_moment(A, 100000, derive_seed(seed, {4}));
        const CMat th = A + A.trace() * CMat::Identity(4, 4);
        const double e = (mc - th).norm() / th.norm();
        std::ostringstream d;
        d << "relative Frobenius error " << e << " (limit 0.03)";
        out.push_back(make("rank-one fourth moment", e < 0.03, d.str()));
    }
    {
        SystemConfig cfg;
        cfg.num_aps = 2;
        cfg.antennas_per_ap = 4;
        cfg.num_users = 3;
        cfg.num_pilots = 3;
        RandomStream rng(derive_seed(seed, {5}));
        const LargeScaleProfile prof = build_profile(cfg, rng);
        const PilotPlan plan = assign_pilots(3, 3, PilotPolicy::orthogonal);
        const double rho = effective_tx_power(cfg, prof);
        const EstimatorStats s = estimator_stats(prof, plan, rho, 1.0, 500, 400, 200, derive_seed(seed, {6}));
        double es = 0.0, el = 0.0;
        for (double x : s.sigma_mean_rel_err) es = std::max(es, x);
        for (double x : s.lambda_mean_rel_err) el = std::max(el, x);
        std::ostringstream d;
        d << "sample covariance bias " << es << " (limit 0.05), individual covariance bias " << el
          << " (limit 0.10)";
        out.push_back(make("estimator unbiasedness", es < 0.05 && el < 0.10, d.str()));
    }
    {
        const CombinerStats c = combiner_stats(16, 4, 200, derive_seed(seed, {7}));
        std::ostringstream d;
        d << "ZF identity " << c.zf_identity << ", ZF nulling " << c.zf_nulling << ", MRC " << c.mrc_identity
          << " (limit 1e-8)";
        out.push_back(make("combiner identities",
                           c.zf_identity < 1e-8 && c.zf_nulling < 1e-8 && c.mrc_identity == 0.0, d.str()));
    }
    return out;
}

} // namespace cfmimo
