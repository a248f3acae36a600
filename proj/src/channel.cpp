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

#include "cfmimo/channel.hpp"

#include <cmath>

namespace cfmimo {

void draw_channel_into(const LargeScaleProfile& profile, RandomStream& rng, CMat& G)
{
    const int K = profile.num_users();
    const int M = profile.num_aps();
    const int N = profile.antennas_per_ap;
    G.resize(M * N, K);
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < M; ++m) {
            const double amp = std::sqrt(profile.gains(k, m));
            for (int n = 0; n < N; ++n) G(m * N + n, k) = amp * rng.complex_normal();
        }
}

ChannelRealization draw_channel(const LargeScaleProfile& profile, std::uint64_t block_index,
                                RandomStream& rng)
{
    ChannelRealization r;
    r.block_index = block_index;
    draw_channel_into(profile, rng, r.G);
    return r;
}

ChannelRealization draw_channel(const LargeScaleProfile& profile, std::uint64_t master_seed,
                                std::uint64_t block_index)
{
    RandomStream rng(derive_seed(master_seed, {0x636861ULL, block_index}));
    return draw_channel(profile, block_index, rng);
}

} // namespace cfmimo
