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

#include "cfmimo/theory.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "cfmimo/channel.hpp"
#include "cfmimo/covariance.hpp"
#include "cfmimo/linkproc.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

double wishart_moment(WishartMoment kind, long n, long m, const std::optional<CMat>& A)
{
    if (m < 1) throw ConfigError("wishart_moment needs m >= 1");
    const double d = static_cast<double>(n - m);
    switch (kind) {
    case WishartMoment::tr_inv:
        if (n <= m) throw ConfigError("E tr W^-1 requires n > m");
        return static_cast<double>(m) / d;
    case WishartMoment::tr_inv_sq:
        if (n <= m + 1) throw ConfigError("E tr W^-2 requires n > m + 1");
        return static_cast<double>(m) * static_cast<double>(n) / (d * d * d - d);
    case WishartMoment::quad_form: {
        if (n <= m + 1) throw ConfigError("E |tr(W^-1 A)|^2 requires n > m + 1");
        if (!A) throw ConfigError("quad_form moment requires a matrix A");
        if (A->rows() != m || A->cols() != m) throw ConfigError("quad_form matrix must be m x m");
        const double tr = std::norm(A->trace());
        const double aa = A->squaredNorm(); // tr(A A^H)
        return (tr + aa / d) / (d * d - 1.0);
    }
    }
    throw ConfigError("unknown Wishart moment");
}

MuFactors mu_factors(long n_sigma, long mn)
{
    if (n_sigma <= mn + 1) throw ConfigError("mu factors require n_sigma > MN + 1");
    const double n = static_cast<double>(n_sigma);
    const double d = static_cast<double>(n_sigma - mn);
    return {n * n * n / ((d * d - 1.0) * d), n * n / (d * d - 1.0)};
}

TheoryParams theory_params(const SystemConfig& cfg, const LargeScaleProfile& profile, CovMode mode)
{
    TheoryParams p;
    p.rho = effective_tx_power(cfg, profile);
    p.sigma2 = cfg.noise_power;
    p.n_sigma = cfg.n_sigma;
    p.n_lambda = cfg.n_lambda;
    p.perfect_limit = mode == CovMode::perfect;
    return p;
}

namespace {

struct Coeffs {
    double mu1 = 1.0;
    double mu2 = 1.0;
    double a = 1.0;      // N_Sigma / (N_Sigma - MN)
    double inv_ns = 0.0; // 1 / N_Sigma
    double inv_nl = 0.0; // 1 / N_Lambda
    double n_sigma = 0.0;
};

Coeffs coefficients(const TheoryParams& p, int mn)
{
    Coeffs c;
    if (p.perfect_limit) return c;
    if (p.n_lambda < 1) throw ConfigError("closed forms need n_lambda >= 1");
    const MuFactors mu = mu_factors(p.n_sigma, mn);
    c.mu1 = mu.mu1;
    c.mu2 = mu.mu2;
    c.n_sigma = p.n_sigma;
    c.a = static_cast<double>(p.n_sigma) / static_cast<double>(p.n_sigma - mn);
    c.inv_ns = 1.0 / p.n_sigma;
    c.inv_nl = 1.0 / p.n_lambda;
    return c;
}

// Noise-normalized diagonals: lam[k] = rho Lambda_k / sigma2, sig[p] = sum lam + 1.
struct Normalized {
    std::vector<RVec> lam;
    std::vector<RVec> sig;
    int mn = 0;
    int n = 0;
};

Normalized normalize(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& p)
{
    if (!(p.rho > 0.0) || !(p.sigma2 > 0.0)) throw ConfigError("rho and sigma2 must be positive");
    if (plan.num_users() != profile.num_users()) throw ConfigError("pilot plan and profile disagree on K");
    Normalized z;
    z.mn = profile.mn();
    z.n = profile.antennas_per_ap;
    const double snr = p.rho / p.sigma2;
    for (int k = 0; k < profile.num_users(); ++k) z.lam.push_back(snr * profile.lambda_diag(k));
    for (const auto& group : plan.groups) {
        RVec s = RVec::Ones(z.mn);
        for (int i : group) s += z.lam[static_cast<std::size_t>(i)];
        z.sig.push_back(std::move(s));
    }
    return z;
}

const RVec& lam_of(const Normalized& z, int k) { return z.lam[static_cast<std::size_t>(k)]; }
const RVec& sig_of(const Normalized& z, const PilotPlan& plan, int k)
{
    return z.sig[static_cast<std::size_t>(plan.assignment[static_cast<std::size_t>(k)])];
}

} // namespace

std::vector<MrcClosedForm> mrc_closed_form(const LargeScaleProfile& profile, const PilotPlan& plan,
                                           const TheoryParams& params)
{
    const Normalized z = normalize(profile, plan, params);
    const Coeffs c = coefficients(params, z.mn);
    const double MN = z.mn;
    const double h = 0.5 * c.inv_nl; // 1 / (2 N_Lambda)
    const int K = profile.num_users();

    std::vector<MrcClosedForm> out;
    for (int k = 0; k < K; ++k) {
        const RVec& lk = lam_of(z, k);
        const RVec& s = sig_of(z, plan, k);
        const RVec inv_s = s.cwiseInverse();
        const RVec wk = lk.cwiseProduct(inv_s); // W-bar_k
        const double tr_wk = wk.sum();
        const double tr_wk_lk = wk.dot(lk);

        MrcClosedForm f;
        f.desired = c.a * tr_wk_lk;
        double den = 0.0;
        for (int i = 0; i < K; ++i) {
            const RVec& li = lam_of(z, i);
            const double v = c.mu1 * MN * h * li.dot(s) + c.mu1 * h * tr_wk * li.dot(lk) +
                             c.mu1 * (wk.array() * li.array() * lk.array()).sum();
            f.i_ex.push_back(v);
            den += v;
        }
        const auto& group = plan.groups[static_cast<std::size_t>(plan.assignment[static_cast<std::size_t>(k)])];
        const double tr_sinv2_lk = (inv_s.array().square() * lk.array()).sum();
        const double tr_sinv = inv_s.sum();
        for (int i : group) {
            const RVec& li = lam_of(z, i);
            const RVec wi = li.cwiseProduct(inv_s);
            const RVec li2 = li.cwiseAbs2();
            const double cross = lk.dot(wi);
            const double v = c.mu1 * h * c.inv_ns * tr_sinv2_lk * (li2.array() * lk.array()).sum() +
                             c.mu1 * c.inv_ns * (wk.array().square() * li2.array()).sum() +
                             c.mu1 * MN * h * c.inv_ns * tr_sinv * li2.dot(s) + c.mu2 * cross * cross +
                             c.mu2 * h * (wi.array().square() * s.array().square()).sum() +
                             c.mu2 * h * (wi.array().square() * lk.array().square()).sum();
            f.i_in.push_back(v);
            den += v;
        }
        f.noise = c.mu1 * tr_wk_lk + c.mu1 * MN * h * s.sum() + c.mu1 * h * lk.sum() * tr_wk;
        den += f.noise - f.desired * f.desired;
        if (!(den > 0.0)) {
            std::ostringstream msg;
            msg << "MRC closed-form denominator is not positive for user " << k << "; increase n_sigma";
            throw NumericalError(msg.str());
        }
        f.gamma = f.desired * f.desired / den;
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<double> mrc_sinr_closed(const LargeScaleProfile& profile, const PilotPlan& plan, const SystemConfig& cfg)
{
    validate(cfg, {true, true});
    std::vector<double> g;
    for (const auto& f : mrc_closed_form(profile, plan, theory_params(cfg, profile, CovMode::estimated)))
        g.push_back(f.gamma);
    return g;
}

std::vector<MrcLimitTerms> mrc_limit_terms(const LargeScaleProfile& profile, const PilotPlan& plan,
                                           const TheoryParams& params)
{
    if (params.perfect_limit) throw ConfigError("the large-array MRC limit needs finite n_sigma and n_lambda");
    if (params.n_sigma < 1 || params.n_lambda < 1) throw ConfigError("n_sigma and n_lambda must be >= 1");
    const Normalized z = normalize(profile, plan, params);
    const double h = 0.5 / params.n_lambda;
    const double r = static_cast<double>(params.n_sigma) * h; // N_Sigma / (2 N_Lambda)

    std::vector<MrcLimitTerms> out;
    for (int k = 0; k < profile.num_users(); ++k) {
        const RVec& lk = lam_of(z, k);
        const RVec& s = sig_of(z, plan, k);
        const RVec s2 = s.cwiseAbs2();
        const double t = (lk.array().square() / s.array()).sum();

        MrcLimitTerms f;
        f.numerator = t * t;
        double den = 0.0;
        const auto& group = plan.groups[static_cast<std::size_t>(plan.assignment[static_cast<std::size_t>(k)])];
        for (int i : group) {
            const RVec& li = lam_of(z, i);
            const RVec li2 = li.cwiseAbs2();
            const double lead = (lk.array() * li.array() * s.array()).sum();
            const double v = lead * lead +
                             h * ((li2.array() * s2.array() * (s2.array() + lk.array().square())).sum() +
                                  s.cwiseInverse().sum() * li2.dot(s));
            f.contamination.push_back(v);
            den += v;
        }
        for (int i = 0; i < profile.num_users(); ++i) {
            const double v = r * lam_of(z, i).dot(s);
            f.estimation.push_back(v);
            den += v;
        }
        f.noise = r * s.sum();
        den += f.noise - f.numerator;
        if (!(den > 0.0)) {
            std::ostringstream msg;
            msg << "MRC limit denominator is not positive for user " << k;
            throw NumericalError(msg.str());
        }
        f.gamma = f.numerator / den;
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<double> mrc_sinr_limit(const LargeScaleProfile& profile, const PilotPlan& plan, const SystemConfig& cfg)
{
    validate(cfg, {true, true});
    std::vector<double> g;
    for (const auto& f : mrc_limit_terms(profile, plan, theory_params(cfg, profile, CovMode::estimated)))
        g.push_back(f.gamma);
    return g;
}

namespace {

// Everything in Gamma-tilde except the Wishart term, as a diagonal.
RVec gamma_tilde_base(const Normalized& z, const PilotPlan& plan, const Coeffs& c)
{
    const double h = 0.5 * c.inv_nl;
    RVec g = RVec::Ones(z.mn);
    for (int k = 0; k < static_cast<int>(z.lam.size()); ++k) {
        const RVec& lk = lam_of(z, k);
        const RVec& s = sig_of(z, plan, k);
        g += lk;
        g -= c.mu1 * h * s.cwiseInverse().sum() * s.cwiseAbs2();
        g -= c.mu1 * h * lk.sum() * lk.cwiseProduct(s);
    }
    return g;
}

} // namespace

RVec zf_gamma_tilde_diag(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& params)
{
    const Normalized z = normalize(profile, plan, params);
    const Coeffs c = coefficients(params, z.mn);
    RVec g = gamma_tilde_base(z, plan, c);
    for (int k = 0; k < profile.num_users(); ++k) {
        const RVec& lk = lam_of(z, k);
        const RVec inv_s = sig_of(z, plan, k).cwiseInverse();
        const RVec lk2 = lk.cwiseAbs2();
        g -= c.mu2 * lk2.cwiseProduct(inv_s) + c.mu1 * c.inv_ns * inv_s.sum() * lk2;
    }
    return g;
}

CMat zf_gamma_tilde(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& params)
{
    return zf_gamma_tilde_diag(profile, plan, params).cast<cplx>().asDiagonal();
}

CMat zf_gamma_tilde_sampled(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& params,
                            int samples, std::uint64_t seed)
{
    if (params.perfect_limit) throw ConfigError("sampled Gamma-tilde needs finite n_sigma");
    if (samples < 1) throw ConfigError("samples must be >= 1");
    const Normalized z = normalize(profile, plan, params);
    const Coeffs c = coefficients(params, z.mn);
    const int mn = z.mn;
    const int ns = params.n_sigma;
    const double nsd = ns;

    std::vector<CMat> per_sample(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < samples; ++t) {
        CMat acc = CMat::Zero(mn, mn);
        for (int p = 0; p < plan.num_pilots(); ++p) {
            const auto& group = plan.groups[static_cast<std::size_t>(p)];
            if (group.empty()) continue;
            const RVec& s = z.sig[static_cast<std::size_t>(p)];
            RandomStream rng(derive_seed(seed, {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(p)}));
            CMat Y(mn, ns);
            for (int j = 0; j < ns; ++j)
                for (int r = 0; r < mn; ++r) Y(r, j) = rng.complex_normal(s(r));
            const CMat sigma_hat = sample_covariance(Y);
            const RVec isq = s.cwiseSqrt().cwiseInverse();
            const CMat S = nsd * isq.cast<cplx>().asDiagonal() * sigma_hat * isq.cast<cplx>().asDiagonal();
            const CMat S_inv = Eigen::LLT<CMat>(S).solve(CMat::Identity(mn, mn));
            const CMat mid = S_inv * s.cwiseInverse().cast<cplx>().asDiagonal() * S_inv;
            for (int k : group) {
                const auto L = lam_of(z, k).cast<cplx>().asDiagonal();
                acc.noalias() += nsd * nsd * (L * mid * L);
            }
        }
        per_sample[static_cast<std::size_t>(t)] = std::move(acc);
    }
    CMat mean = CMat::Zero(mn, mn);
    for (const auto& m : per_sample) mean += m;
    mean /= static_cast<double>(samples);
    const CMat herm = 0.5 * (mean + mean.adjoint());
    CMat g = gamma_tilde_base(z, plan, c).cast<cplx>().asDiagonal();
    return g - herm;
}

ZfClosedForm zf_closed_form(const LargeScaleProfile& profile, const PilotPlan& plan, const TheoryParams& params)
{
    const Normalized z = normalize(profile, plan, params);
    const Coeffs c = coefficients(params, z.mn);
    const double MN = z.mn;
    const double h = 0.5 * c.inv_nl;
    const double invN = 1.0 / z.n;

    ZfClosedForm out;
    out.gamma_tilde = zf_gamma_tilde_diag(profile, plan, params);
    const RVec& G = out.gamma_tilde;
    out.gamma.assign(static_cast<std::size_t>(profile.num_users()), 0.0);

    for (int p = 0; p < plan.num_pilots(); ++p) {
        ZfGroupForm f;
        f.users = plan.groups[static_cast<std::size_t>(p)];
        const auto g = static_cast<Eigen::Index>(f.users.size());
        f.xi.resize(g, g);
        f.xi_tilde.resize(g, g);
        if (g == 0) {
            out.groups.push_back(std::move(f));
            continue;
        }
        const RVec& s = z.sig[static_cast<std::size_t>(p)];
        const RVec inv_s = s.cwiseInverse();
        const double tr_s = s.sum();
        const double tr_sg = s.dot(G);
        for (Eigen::Index q = 0; q < g; ++q) {
            const RVec& lk = lam_of(z, f.users[static_cast<std::size_t>(q)]);
            for (Eigen::Index j = 0; j < g; ++j) {
                const RVec& li = lam_of(z, f.users[static_cast<std::size_t>(j)]);
                const RVec core = lk.cwiseProduct(inv_s).cwiseProduct(li);
                const double tr_sinv_li = inv_s.dot(li);
                f.xi(q, j) = invN * (c.mu1 * core.sum() + c.mu1 * MN * h * tr_s + c.mu1 * h * lk.sum() * tr_sinv_li);
                f.xi_tilde(q, j) = invN * (c.mu1 * core.dot(G) + c.mu1 * MN * h * tr_sg +
                                           c.mu1 * h * lk.dot(G) * tr_sinv_li);
            }
        }
        Eigen::FullPivLU<RMat> lu(f.xi);
        if (!lu.isInvertible()) {
            std::ostringstream msg;
            msg << "Xi matrix of pilot " << p << " is singular";
            throw NumericalError(msg.str());
        }
        const RMat xi_inv = lu.inverse();
        const RMat quad = xi_inv * f.xi_tilde * xi_inv;
        for (Eigen::Index q = 0; q < g; ++q) {
            const double den = quad(q, q);
            const int k = f.users[static_cast<std::size_t>(q)];
            if (!(den > 0.0)) {
                std::ostringstream msg;
                msg << "ZF closed-form denominator is not positive for user " << k;
                throw NumericalError(msg.str());
            }
            out.gamma[static_cast<std::size_t>(k)] = static_cast<double>(z.n) / den;
        }
        out.groups.push_back(std::move(f));
    }
    return out;
}

std::vector<double> zf_sinr_closed(const LargeScaleProfile& profile, const PilotPlan& plan, const SystemConfig& cfg)
{
    validate(cfg, {true, true});
    return zf_closed_form(profile, plan, theory_params(cfg, profile, CovMode::estimated)).gamma;
}

std::vector<GramConcentrationPoint> lemma2_diagnostics(const LargeScaleProfile& profile, const PilotPlan& plan,
                                            const TheoryParams& params, const std::vector<int>& antennas_per_ap,
                                            long trials, std::uint64_t seed)
{
    if (trials < 2) throw ConfigError("lemma2 diagnostics need at least 2 trials");
    const int P = plan.num_pilots();
    std::vector<GramConcentrationPoint> out;
    for (int n : antennas_per_ap) {
        if (n < 1) throw ConfigError("antennas per AP must be >= 1");
        LargeScaleProfile prof = profile;
        prof.antennas_per_ap = n;
        const int mn = prof.mn();
        const double inv_mn = 1.0 / mn;
        const EstimatorBank bank = perfect_estimators(prof, plan, params.rho, params.sigma2);

        // Deterministic (1/M) Xi_p / N = (1/MN) rho tr(Lambda_k Sigma_p^{-1} Lambda_i).
        std::vector<RMat> xi(static_cast<std::size_t>(P));
        for (int p = 0; p < P; ++p) {
            const auto& group = plan.groups[static_cast<std::size_t>(p)];
            const RVec s = perfect_received_covariance(prof, group, params.rho, params.sigma2);
            RMat& x = xi[static_cast<std::size_t>(p)];
            x.resize(static_cast<Eigen::Index>(group.size()), static_cast<Eigen::Index>(group.size()));
            for (std::size_t q = 0; q < group.size(); ++q)
                for (std::size_t j = 0; j < group.size(); ++j)
                    x(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) =
                        inv_mn * params.rho *
                        (prof.lambda_diag(group[q]).array() * prof.lambda_diag(group[j]).array() / s.array()).sum();
        }

        std::vector<double> cross(static_cast<std::size_t>(trials), 0.0);
        std::vector<double> in(static_cast<std::size_t>(trials), 0.0);
#pragma omp parallel for schedule(dynamic)
        for (long t = 0; t < trials; ++t) {
            RandomStream rng(derive_seed(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t)}));
            CMat G;
            draw_channel_into(prof, rng, G);
            CMat Y = CMat::Zero(mn, P);
            for (int p = 0; p < P; ++p) {
                const auto& group = plan.groups[static_cast<std::size_t>(p)];
                if (!group.empty())
                    receive_pilot_into(G, group, PilotMode::plain, {}, params.rho, params.sigma2, rng, Y.col(p));
            }
            const CMat Gh = estimate_channels(bank, plan, Y).G_hat;
            auto cols = [&](int p) {
                const auto& group = plan.groups[static_cast<std::size_t>(p)];
                CMat B(mn, static_cast<Eigen::Index>(group.size()));
                for (std::size_t q = 0; q < group.size(); ++q) B.col(static_cast<Eigen::Index>(q)) = Gh.col(group[q]);
                return B;
            };
            double csum = 0.0;
            int cpairs = 0;
            double isum = 0.0;
            int igroups = 0;
            for (int p = 0; p < P; ++p) {
                if (plan.groups[static_cast<std::size_t>(p)].empty()) continue;
                const CMat Bp = cols(p);
                const CMat dev = inv_mn * (Bp.adjoint() * Bp) - xi[static_cast<std::size_t>(p)].cast<cplx>();
                isum += dev.norm();
                ++igroups;
                for (int i = p + 1; i < P; ++i) {
                    if (plan.groups[static_cast<std::size_t>(i)].empty()) continue;
                    csum += (inv_mn * (Bp.adjoint() * cols(i))).norm();
                    ++cpairs;
                }
            }
            cross[static_cast<std::size_t>(t)] = cpairs ? csum / cpairs : 0.0;
            in[static_cast<std::size_t>(t)] = igroups ? isum / igroups : 0.0;
        }

        auto summarize = [&](const std::vector<double>& v, double& mean, double& se) {
            double s = 0.0;
            for (double x : v) s += x;
            mean = s / static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
        };
        GramConcentrationPoint pt;
        pt.antennas_per_ap = n;
        pt.mn = mn;
        summarize(cross, pt.cross_mean, pt.cross_stderr);
        summarize(in, pt.in_mean, pt.in_stderr);
        out.push_back(pt);
    }
    return out;
}

} // namespace cfmimo
