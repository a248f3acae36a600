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

#include "cfmimo/pilots.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cfmimo {

int PilotPlan::position_in_group(int k) const
{
    const auto& g = groups.at(static_cast<std::size_t>(assignment.at(static_cast<std::size_t>(k))));
    for (std::size_t q = 0; q < g.size(); ++q)
        if (g[q] == k) return static_cast<int>(q);
    throw ConfigError("user " + std::to_string(k) + " missing from its pilot group");
}

PilotPlan assign_pilots(int num_users, int num_pilots, PilotPolicy policy)
{
    if (num_users < 1 || num_pilots < 1) throw ConfigError("assign_pilots needs K >= 1 and P >= 1");
    if (policy == PilotPolicy::orthogonal && num_pilots < num_users)
        throw ConfigError("orthogonal pilots need P >= K (got P=" + std::to_string(num_pilots) +
                          ", K=" + std::to_string(num_users) + ")");
    PilotPlan plan;
    plan.assignment.resize(static_cast<std::size_t>(num_users));
    plan.groups.assign(static_cast<std::size_t>(num_pilots), {});
    for (int k = 0; k < num_users; ++k) {
        // Both policies reduce to k mod P; orthogonal only differs by its precondition.
        const int p = k % num_pilots;
        plan.assignment[static_cast<std::size_t>(k)] = p;
        plan.groups[static_cast<std::size_t>(p)].push_back(k);
    }
    return plan;
}

PilotPolicy default_policy(int num_users, int num_pilots)
{
    return num_pilots >= num_users ? PilotPolicy::orthogonal : PilotPolicy::round_robin;
}

PhaseSchedule phase_schedule(int num_users, int n_pairs, RandomStream& rng)
{
    if (n_pairs < 1) throw ConfigError("phase_schedule needs n_pairs >= 1");
    PhaseSchedule s;
    s.theta.resize(num_users, n_pairs);
    for (int n = 0; n < n_pairs; ++n)
        for (int k = 0; k < num_users; ++k) {
            double t = 2.0 * std::numbers::pi * rng.uniform();
            if (t >= 2.0 * std::numbers::pi) t = 0.0;
            s.theta(k, n) = t;
        }
    return s;
}

void receive_pilot_into(const CMat& G, std::span<const int> group, PilotMode mode,
                        std::span<const double> theta, double rho, double sigma2,
                        RandomStream& rng, Eigen::Ref<CVec> y)
{
    if (mode == PilotMode::shifted && theta.size() != group.size())
        throw ConfigError("shifted pilot needs one phase per group member");
    const double amp = std::sqrt(rho);
    y.setZero();
    for (std::size_t q = 0; q < group.size(); ++q) {
        const cplx c = mode == PilotMode::plain ? cplx(amp, 0.0) : std::polar(amp, theta[q]);
        y += c * G.col(group[q]);
    }
    for (Eigen::Index j = 0; j < y.size(); ++j) y(j) += rng.complex_normal(sigma2);
}

CVec receive_pilot(const ChannelRealization& channel, std::span<const int> group, PilotMode mode,
                   std::span<const double> theta, double rho, double sigma2, RandomStream& rng)
{
    CVec y(channel.G.rows());
    receive_pilot_into(channel.G, group, mode, theta, rho, sigma2, rng, y);
    return y;
}

CVec derotate(const CVec& y_shifted, double theta)
{
    return y_shifted * std::polar(1.0, -theta);
}

} // namespace cfmimo
