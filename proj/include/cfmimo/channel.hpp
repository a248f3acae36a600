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

#include <cstdint>

#include "cfmimo/common.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// One block-fading realization; column k of G is g_k = Lambda_k^{1/2} h_k.
struct ChannelRealization {
    CMat G; // MN x K
    std::uint64_t block_index = 0;
};

ChannelRealization draw_channel(const LargeScaleProfile& profile, std::uint64_t block_index,
                                RandomStream& rng);

/// Same as above with the block stream derived from (master_seed, block_index).
ChannelRealization draw_channel(const LargeScaleProfile& profile, std::uint64_t master_seed,
                                std::uint64_t block_index);

/// In-place variant for hot loops; G is resized if needed.
void draw_channel_into(const LargeScaleProfile& profile, RandomStream& rng, CMat& G);

} // namespace cfmimo
