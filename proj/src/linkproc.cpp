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

#include "cfmimo/linkproc.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "cfmimo/channel.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

CVec mmse_estimate_perfect(const CVec& y, const RVec& lambda_k, const RVec& sigma_p, double rho)
{
    if (y.size() != lambda_k.size() || y.size() != sigma_p.size())
        throw std::invalid_argument("mmse_estimate_perfect: dimension mismatch");
    if ((sigma_p.array() <= 0.0).any()) throw NumericalError("received covariance is not positive definite");
    const RVec w = std::sqrt(rho) * lambda_k.array() / sigma_p.array();
    return w.cast<cplx>().cwiseProduct(y);
}

CMat estimator_matrix(const CMat& lambda_hat, const CMat& sigma_hat)
{
    if (sigma_hat.rows() != sigma_hat.cols() || lambda_hat.rows() != sigma_hat.rows() ||
        lambda_hat.cols() != sigma_hat.cols())
        throw std::invalid_argument("estimator_matrix: dimension mismatch");
    Eigen::LLT<CMat> llt(sigma_hat);
    if (llt.info() != Eigen::Success)
        throw NumericalError("sample covariance is singular; use n_sigma >= MN");
    // Sigma Hermitian: (Sigma^{-1} Lambda^H)^H = Lambda Sigma^{-1}.
    return llt.solve(lambda_hat.adjoint()).adjoint();
}

ImperfectEstimate mmse_estimate_imperfect(const CVec& y, const CMat& lambda_hat, const CMat& sigma_hat)
{
    if (y.size() != sigma_hat.rows()) throw std::invalid_argument("mmse_estimate_imperfect: dimension mismatch");
    ImperfectEstimate out;
    out.W_hat = estimator_matrix(lambda_hat, sigma_hat);
    out.g_hat = out.W_hat * y;
    return out;
}

EstimatorBank perfect_estimators(const LargeScaleProfile& profile, const PilotPlan& plan, double rho,
                                 double sigma2)
{
    EstimatorBank bank;
    bank.provenance = CovMode::perfect;
    std::vector<RVec> sigma;
    for (const auto& group : plan.groups) sigma.push_back(perfect_received_covariance(profile, group, rho, sigma2));
    for (int k = 0; k < profile.num_users(); ++k) {
        const RVec& s = sigma[static_cast<std::size_t>(plan.assignment[static_cast<std::size_t>(k)])];
        bank.diag.push_back(std::sqrt(rho) * profile.lambda_diag(k).array() / s.array());
    }
    return bank;
}

EstimatorBank estimated_estimators(const CovarianceSet& set, const PilotPlan& plan)
{
    EstimatorBank bank;
    bank.provenance = set.provenance;
    std::vector<Eigen::LLT<CMat>> chol;
    for (std::size_t p = 0; p < set.sigma_per_pilot.size(); ++p) {
        chol.emplace_back(set.sigma_per_pilot[p]);
        if (chol.back().info() != Eigen::Success)
            throw NumericalError("sample covariance is singular; use n_sigma >= MN");
    }
    for (std::size_t k = 0; k < set.lambda_per_user.size(); ++k) {
        const auto p = static_cast<std::size_t>(plan.assignment[k]);
        bank.dense.push_back(chol[p].solve(set.lambda_per_user[k].adjoint()).adjoint());
    }
    return bank;
}

EstimatedChannels estimate_channels(const EstimatorBank& bank, const PilotPlan& plan, const CMat& Y)
{
    const int K = plan.num_users();
    EstimatedChannels out;
    out.covariance_provenance = bank.provenance;
    out.G_hat.resize(Y.rows(), K);
    for (int k = 0; k < K; ++k) {
        const auto p = plan.assignment[static_cast<std::size_t>(k)];
        const auto ks = static_cast<std::size_t>(k);
        if (!bank.dense.empty())
            out.G_hat.col(k).noalias() = bank.dense[ks] * Y.col(p);
        else
            out.G_hat.col(k) = bank.diag[ks].cast<cplx>().cwiseProduct(Y.col(p));
    }
    return out;
}

CMat combiner(const CMat& G_hat, Scheme scheme)
{
    if (scheme == Scheme::mrc) return G_hat;
    const CMat gram = G_hat.adjoint() * G_hat;
    Eigen::SelfAdjointEigenSolver<CMat> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kZfConditionLimit)
        throw NumericalError("ZF Gram matrix is ill-conditioned (condition number above 1e12)");
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("ZF Gram matrix is not positive definite");
    return G_hat * llt.solve(CMat::Identity(gram.rows(), gram.cols()));
}

double achievable_rate(double gamma, int pilot_symbols, int tau_c)
{
    if (pilot_symbols < 0 || tau_c <= 0 || pilot_symbols >= tau_c)
        throw ConfigError("achievable_rate needs 0 <= pilot_symbols < tau_c");
    if (!(gamma >= 0.0)) throw std::invalid_argument("achievable_rate needs gamma >= 0");
    return (1.0 - static_cast<double>(pilot_symbols) / tau_c) * std::log2(1.0 + gamma);
}

namespace {

// Running sums of x = w^H g_k (re, im), y = sum_i |w^H g_i|^2, z = ||w||^2
// and of all their pairwise products.
struct Moments {
    long n = 0;
    std::array<double, 4> s{};
    std::array<double, 10> ss{}; // upper triangle, row-major

    void add(const std::array<double, 4>& v)
    {
        ++n;
        int t = 0;
        for (int a = 0; a < 4; ++a) {
            s[a] += v[a];
            for (int b = a; b < 4; ++b) ss[t++] += v[a] * v[b];
        }
    }
    void merge(const Moments& o)
    {
        n += o.n;
        for (int a = 0; a < 4; ++a) s[a] += o.s[a];
        for (int t = 0; t < 10; ++t) ss[t] += o.ss[t];
    }
};

struct Partial {
    std::vector<Moments> m; // scheme-major, [s * K + k]
    std::vector<long> skipped;

    Partial(std::size_t schemes, int K) : m(schemes * static_cast<std::size_t>(K)), skipped(schemes, 0) {}
    void merge(const Partial& o)
    {
        for (std::size_t i = 0; i < m.size(); ++i) m[i].merge(o.m[i]);
        for (std::size_t i = 0; i < skipped.size(); ++i) skipped[i] += o.skipped[i];
    }
};

struct TrialContext {
    const LargeScaleProfile& profile;
    const PilotPlan& plan;
    const UatfSettings& st;
    const EstimatorBank* fixed_bank; // perfect mode only
};

struct Scratch {
    CMat G;
    CMat Y;
};

void run_trial(const TrialContext& ctx, long t, Scratch& sc, Partial& acc)
{
    const auto& st = ctx.st;
    const int K = ctx.profile.num_users();
    const int mn = ctx.profile.mn();
    const auto trial = static_cast<std::uint64_t>(t);

    EstimatorBank window_bank;
    const EstimatorBank* bank = ctx.fixed_bank;
    if (st.cov_mode == CovMode::estimated) {
        const WindowParams wp{st.rho, st.sigma2, st.n_sigma, st.n_lambda};
        window_bank = estimated_estimators(
            estimate_covariances(ctx.profile, ctx.plan, wp, derive_seed(st.seed, {trial, 0})), ctx.plan);
        bank = &window_bank;
    }

    RandomStream rng(derive_seed(st.seed, {trial, 1}));
    draw_channel_into(ctx.profile, rng, sc.G);
    sc.Y.setZero(mn, ctx.plan.num_pilots());
    for (int p = 0; p < ctx.plan.num_pilots(); ++p) {
        const auto& group = ctx.plan.groups[static_cast<std::size_t>(p)];
        if (group.empty()) continue;
        receive_pilot_into(sc.G, group, PilotMode::plain, {}, st.rho, st.sigma2, rng, sc.Y.col(p));
    }
    const CMat G_hat = estimate_channels(*bank, ctx.plan, sc.Y).G_hat;

    for (std::size_t s = 0; s < st.schemes.size(); ++s) {
        CMat W;
        try {
            W = combiner(G_hat, st.schemes[s]);
        } catch (const NumericalError&) {
            ++acc.skipped[s];
            continue;
        }
        const CMat A = W.adjoint() * sc.G; // A(k, i) = w_k^H g_i
        for (int k = 0; k < K; ++k) {
            const cplx x = A(k, k);
            acc.m[s * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)].add(
                {x.real(), x.imag(), A.row(k).squaredNorm(), W.col(k).squaredNorm()});
        }
    }
}

SinrEstimate finish(const Moments& mo, long skipped, double rho, double sigma2)
{
    SinrEstimate e;
    e.trials = mo.n;
    e.skipped = skipped;
    if (mo.n == 0) return e;
    const double n = static_cast<double>(mo.n);
    std::array<double, 4> mean{};
    for (int a = 0; a < 4; ++a) mean[a] = mo.s[a] / n;

    const double d = mean[0] * mean[0] + mean[1] * mean[1];
    e.desired_power = rho * d;
    e.total_power = rho * mean[2];
    e.noise_term = sigma2 * mean[3];
    const double den = e.total_power - e.desired_power + e.noise_term;
    e.gamma = e.desired_power / den;

    if (mo.n > 1) {
        // Covariance of the sample means.
        Eigen::Matrix4d C;
        int t = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b) {
                const double c = (mo.ss[t++] - n * mean[a] * mean[b]) / (n - 1.0) / n;
                C(a, b) = c;
                C(b, a) = c;
            }
        // gamma = rho d / (rho y - rho d + sigma2 z)
        const double dd = rho / den + e.desired_power * rho / (den * den); // d gamma / d d
        Eigen::Vector4d grad;
        grad << dd * 2.0 * mean[0], dd * 2.0 * mean[1], -e.desired_power * rho / (den * den),
            -e.desired_power * sigma2 / (den * den);
        e.std_error = std::sqrt(std::max(0.0, grad.dot(C * grad)));
    }
    return e;
}

Partial reduce_pairwise(std::vector<Partial>& parts, std::size_t lo, std::size_t hi)
{
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    Partial left = reduce_pairwise(parts, lo, mid);
    left.merge(reduce_pairwise(parts, mid, hi));
    return left;
}

constexpr long kBlockTrials = 64;

} // namespace

std::vector<std::vector<SinrEstimate>> uatf_monte_carlo(const LargeScaleProfile& profile, const PilotPlan& plan,
                                                         const UatfSettings& st, Execution exec)
{
    if (st.trials < 1) throw ConfigError("trials must be >= 1");
    if (st.schemes.empty()) throw ConfigError("at least one combining scheme is required");
    if (!(st.rho > 0.0) || !(st.sigma2 > 0.0)) throw ConfigError("rho and sigma2 must be positive");
    if (plan.num_users() != profile.num_users()) throw ConfigError("pilot plan and profile disagree on K");
    if (st.cov_mode == CovMode::estimated && st.n_sigma < profile.mn())
        throw ConfigError("n_sigma must be >= MN for estimated covariances");

    const int K = profile.num_users();
    EstimatorBank perfect_bank;
    if (st.cov_mode == CovMode::perfect) perfect_bank = perfect_estimators(profile, plan, st.rho, st.sigma2);
    const TrialContext ctx{profile, plan, st, &perfect_bank};

    Partial total(st.schemes.size(), K);
    if (exec == Execution::serial) {
        Scratch sc;
        for (long t = 0; t < st.trials; ++t) run_trial(ctx, t, sc, total);
    } else {
        const long blocks = (st.trials + kBlockTrials - 1) / kBlockTrials;
        std::vector<Partial> parts(static_cast<std::size_t>(blocks), Partial(st.schemes.size(), K));
        std::exception_ptr error;
#pragma omp parallel
        {
            Scratch sc;
#pragma omp for schedule(dynamic)
            for (long b = 0; b < blocks; ++b) {
                try {
                    const long end = std::min(st.trials, (b + 1) * kBlockTrials);
                    for (long t = b * kBlockTrials; t < end; ++t)
                        run_trial(ctx, t, sc, parts[static_cast<std::size_t>(b)]);
                } catch (...) {
#pragma omp critical(cfmimo_uatf_error)
                    if (!error) error = std::current_exception();
                }
            }
        }
        if (error) std::rethrow_exception(error);
        total = reduce_pairwise(parts, 0, parts.size());
    }

    std::vector<std::vector<SinrEstimate>> out(st.schemes.size());
    for (std::size_t s = 0; s < st.schemes.size(); ++s) {
        if (static_cast<double>(total.skipped[s]) > 0.01 * static_cast<double>(st.trials)) {
            std::ostringstream msg;
            msg << to_string(st.schemes[s]) << " combiner failed in " << total.skipped[s] << " of " << st.trials
                << " trials";
            throw NumericalError(msg.str());
        }
        for (int k = 0; k < K; ++k)
            out[s].push_back(
                finish(total.m[s * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)], total.skipped[s],
                       st.rho, st.sigma2));
    }
    return out;
}

std::vector<SinrEstimate> uatf_sinr_monte_carlo(const SystemConfig& config, const LargeScaleProfile& profile,
                                                const PilotPlan& plan, Scheme scheme, CovMode cov_mode,
                                                long trials, std::uint64_t seed)
{
    validate(config, {cov_mode == CovMode::estimated, false});
    UatfSettings st;
    st.schemes = {scheme};
    st.cov_mode = cov_mode;
    st.trials = trials;
    st.rho = effective_tx_power(config, profile);
    st.sigma2 = config.noise_power;
    st.n_sigma = config.n_sigma;
    st.n_lambda = config.n_lambda;
    st.seed = seed;
    return uatf_monte_carlo(profile, plan, st).front();
}

} // namespace cfmimo
