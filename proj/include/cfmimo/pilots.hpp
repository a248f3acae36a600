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

#include <span>
#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/common.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

enum class PilotPolicy { orthogonal, round_robin };

/// User-to-pilot assignment and the co-pilot groups U_p (ascending user index).
struct PilotPlan {
    std::vector<int> assignment;          // length K, values in [0, P)
    std::vector<std::vector<int>> groups; // length P

    int num_users() const { return static_cast<int>(assignment.size()); }
    int num_pilots() const { return static_cast<int>(groups.size()); }
    /// Position of user k inside its group.
    int position_in_group(int k) const;
};

PilotPlan assign_pilots(int num_users, int num_pilots, PilotPolicy policy);

/// orthogonal when P >= K, round_robin otherwise.
PilotPolicy default_policy(int num_users, int num_pilots);

/// Phase shifts theta(k, n) in [0, 2pi) for user k and the n-th shifted block.
struct PhaseSchedule {
    RMat theta; // K x n_pairs
};

/// i.i.d. uniform phases, drawn pair-major so a longer schedule from the same
/// stream extends a shorter one.
PhaseSchedule phase_schedule(int num_users, int n_pairs, RandomStream& rng);

enum class PilotMode { plain, shifted };

/// Despread observation of one pilot group:
///   plain:   y = sqrt(rho) sum_{i in group} g_i + n
///   shifted: y = sqrt(rho) sum_{i in group} g_i e^{j theta_i} + n
/// with n ~ CN(0, sigma2 I). `theta` holds one phase per group member
/// (ignored in plain mode).
CVec receive_pilot(const ChannelRealization& channel, std::span<const int> group, PilotMode mode,
                   std::span<const double> theta, double rho, double sigma2, RandomStream& rng);

/// Same as receive_pilot but writes into `y` (hot-loop form).
void receive_pilot_into(const CMat& G, std::span<const int> group, PilotMode mode,
                        std::span<const double> theta, double rho, double sigma2,
                        RandomStream& rng, Eigen::Ref<CVec> y);

/// y * e^{-j theta}.
CVec derotate(const CVec& y_shifted, double theta);

} // namespace cfmimo
