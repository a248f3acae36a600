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

#include "cfmimo/covariance.hpp"

#include <algorithm>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "cfmimo/channel.hpp"

namespace cfmimo {

RVec perfect_received_covariance(const LargeScaleProfile& profile, std::span<const int> group,
                                 double rho, double sigma2)
{
    RVec d = RVec::Constant(profile.mn(), sigma2);
    for (int i : group) d += rho * profile.lambda_diag(i);
    return d;
}

CMat sample_covariance(std::span<const CVec> observations)
{
    if (observations.empty()) throw ConfigError("sample_covariance needs at least one observation");
    const Eigen::Index dim = observations.front().size();
    CMat Y(dim, static_cast<Eigen::Index>(observations.size()));
    for (std::size_t n = 0; n < observations.size(); ++n) Y.col(static_cast<Eigen::Index>(n)) = observations[n];
    return sample_covariance(Y);
}

CMat sample_covariance(const CMat& Y)
{
    if (Y.cols() == 0) throw ConfigError("sample_covariance needs at least one observation");
    CMat S = Y * Y.adjoint() / static_cast<double>(Y.cols());
    // exact Hermitian symmetry; the product leaves round-off in the lower triangle
    S.triangularView<Eigen::StrictlyLower>() = S.adjoint().triangularView<Eigen::StrictlyLower>();
    S.diagonal() = S.diagonal().real().cast<cplx>();
    return S;
}

CMat psd_project(const CMat& A)
{
    const CMat H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> eig(H);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in psd_project");
    const RVec d = eig.eigenvalues().cwiseMax(0.0);
    CMat P = eig.eigenvectors() * d.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
    return 0.5 * (P + P.adjoint());
}

CMat individual_covariance(const CMat& H1, const CMat& H2, double rho)
{
    if (H1.cols() == 0) throw ConfigError("individual_covariance needs at least one block pair");
    if (!(rho > 0.0)) throw ConfigError("individual_covariance needs rho > 0");
    if (H1.rows() != H2.rows() || H1.cols() != H2.cols())
        throw ConfigError("individual_covariance: observation shapes differ");
    const CMat C = H1 * H2.adjoint();
    return psd_project((C + C.adjoint()) / (2.0 * static_cast<double>(H1.cols()) * rho));
}

CMat individual_covariance(std::span<const std::pair<CVec, CVec>> pairs, double rho)
{
    if (pairs.empty()) throw ConfigError("individual_covariance needs at least one block pair");
    const Eigen::Index dim = pairs.front().first.size();
    CMat H1(dim, static_cast<Eigen::Index>(pairs.size()));
    CMat H2(dim, static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        H1.col(static_cast<Eigen::Index>(n)) = pairs[n].first;
        H2.col(static_cast<Eigen::Index>(n)) = pairs[n].second;
    }
    return individual_covariance(H1, H2, rho);
}

CovarianceSet perfect_covariance_set(const LargeScaleProfile& profile, const PilotPlan& plan,
                                     double rho, double sigma2)
{
    CovarianceSet set;
    set.provenance = CovMode::perfect;
    for (const auto& g : plan.groups)
        set.sigma_per_pilot.push_back(perfect_received_covariance(profile, g, rho, sigma2).cast<cplx>().asDiagonal());
    for (int k = 0; k < profile.num_users(); ++k)
        set.lambda_per_user.push_back(profile.lambda_diag(k).cast<cplx>().asDiagonal());
    return set;
}

CovarianceSet estimate_covariances(const LargeScaleProfile& profile, const PilotPlan& plan,
                                   const WindowParams& w, std::uint64_t window_seed)
{
    if (w.n_sigma < 1 || w.n_lambda < 1) throw ConfigError("estimate_covariances needs n_sigma, n_lambda >= 1");
    const int mn = profile.mn();
    const int K = profile.num_users();
    const int P = plan.num_pilots();
    // Window layout: N_Lambda (plain, shifted) pairs for Lambda-hat, then
    // N_Sigma further plain blocks for Sigma-hat, so the two are independent.
    // Each part has its own streams: a shorter window is a prefix of a longer one.
    RandomStream pair_rng(derive_seed(window_seed, {1}));
    RandomStream shifted_rng(derive_seed(window_seed, {2}));
    RandomStream phase_rng(derive_seed(window_seed, {3}));
    RandomStream sigma_rng(derive_seed(window_seed, {4}));
    const PhaseSchedule schedule = phase_schedule(K, w.n_lambda, phase_rng);

    std::vector<CMat> plain(static_cast<std::size_t>(P), CMat(mn, w.n_lambda));
    std::vector<CMat> sigma_obs(static_cast<std::size_t>(P), CMat(mn, w.n_sigma));
    std::vector<CMat> derotated(static_cast<std::size_t>(K), CMat(mn, w.n_lambda));
    CMat G;
    CVec y(mn);
    std::vector<double> theta;
    for (int n = 0; n < w.n_lambda; ++n) {
        draw_channel_into(profile, pair_rng, G);
        for (int p = 0; p < P; ++p) {
            const auto& group = plan.groups[static_cast<std::size_t>(p)];
            receive_pilot_into(G, group, PilotMode::plain, {}, w.rho, w.sigma2, pair_rng,
                               plain[static_cast<std::size_t>(p)].col(n));
            if (group.empty()) continue;
            theta.resize(group.size());
            for (std::size_t q = 0; q < group.size(); ++q) theta[q] = schedule.theta(group[q], n);
            receive_pilot_into(G, group, PilotMode::shifted, theta, w.rho, w.sigma2, shifted_rng, y);
            for (std::size_t q = 0; q < group.size(); ++q)
                derotated[static_cast<std::size_t>(group[q])].col(n) = y * std::polar(1.0, -theta[q]);
        }
    }
    for (int n = 0; n < w.n_sigma; ++n) {
        draw_channel_into(profile, sigma_rng, G);
        for (int p = 0; p < P; ++p)
            receive_pilot_into(G, plan.groups[static_cast<std::size_t>(p)], PilotMode::plain, {}, w.rho, w.sigma2,
                               sigma_rng, sigma_obs[static_cast<std::size_t>(p)].col(n));
    }

    CovarianceSet set;
    set.provenance = CovMode::estimated;
    set.n_sigma = w.n_sigma;
    set.n_lambda = w.n_lambda;
    for (int p = 0; p < P; ++p)
        set.sigma_per_pilot.push_back(sample_covariance(sigma_obs[static_cast<std::size_t>(p)]));
    for (int k = 0; k < K; ++k) {
        const int p = plan.assignment[static_cast<std::size_t>(k)];
        set.lambda_per_user.push_back(individual_covariance(
            plain[static_cast<std::size_t>(p)], derotated[static_cast<std::size_t>(k)], w.rho));
    }
    return set;
}

namespace {

nlohmann::json matrix_to_json(const CMat& A)
{
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index r = 0; r < A.rows(); ++r)
        for (Eigen::Index c = 0; c < A.cols(); ++c) data.push_back({A(r, c).real(), A(r, c).imag()});
    return {{"rows", A.rows()}, {"cols", A.cols()}, {"data", std::move(data)}};
}

CMat matrix_from_json(const nlohmann::json& j)
{
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw ConfigError("covariance matrix payload has wrong length");
    CMat A(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& e = data[static_cast<std::size_t>(r * cols + c)];
            A(r, c) = {e.at(0).get<double>(), e.at(1).get<double>()};
        }
    return A;
}

} // namespace

nlohmann::json covariance_to_json(const CovarianceSet& set)
{
    nlohmann::json j;
    j["provenance"] = to_string(set.provenance);
    j["n_sigma"] = set.n_sigma;
    j["n_lambda"] = set.n_lambda;
    j["sigma_per_pilot"] = nlohmann::json::array();
    for (const auto& S : set.sigma_per_pilot) j["sigma_per_pilot"].push_back(matrix_to_json(S));
    j["lambda_per_user"] = nlohmann::json::array();
    for (const auto& L : set.lambda_per_user) j["lambda_per_user"].push_back(matrix_to_json(L));
    return j;
}

CovarianceSet covariance_from_json(const nlohmann::json& j)
{
    try {
        CovarianceSet set;
        set.provenance = parse_cov_mode(j.at("provenance").get<std::string>());
        set.n_sigma = j.at("n_sigma").get<int>();
        set.n_lambda = j.at("n_lambda").get<int>();
        for (const auto& m : j.at("sigma_per_pilot")) set.sigma_per_pilot.push_back(matrix_from_json(m));
        for (const auto& m : j.at("lambda_per_user")) set.lambda_per_user.push_back(matrix_from_json(m));
        return set;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed covariance dump: ") + e.what());
    }
}

void save_covariance(const CovarianceSet& set, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write covariance dump '" + path + "'");
    out << covariance_to_json(set).dump();
    if (!out) throw std::runtime_error("write failed for covariance dump '" + path + "'");
}

CovarianceSet load_covariance(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open covariance dump '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse covariance dump '" + path + "': " + e.what());
    }
    return covariance_from_json(j);
}

} // namespace cfmimo
