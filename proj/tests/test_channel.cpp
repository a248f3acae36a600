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

#include "cfmimo/channel.hpp"
#include "cfmimo/rng.hpp"

using namespace cfmimo;

namespace {

LargeScaleProfile flat_profile(int K, int M, int N, double lambda)
{
    LargeScaleProfile p;
    p.gains = RMat::Constant(K, M, lambda);
    p.ap_positions.assign(static_cast<std::size_t>(M), {});
    p.user_positions.assign(static_cast<std::size_t>(K), {});
    p.antennas_per_ap = N;
    return p;
}

} // namespace

TEST_CASE("channel second moments")
{
    const auto prof = flat_profile(2, 2, 4, 1.0);
    RandomStream rng(1);
    double norm2 = 0.0;
    double re2 = 0.0, im2 = 0.0;
    const int T = 10000;
    for (int t = 0; t < T; ++t) {
        const auto ch = draw_channel(prof, static_cast<std::uint64_t>(t), rng);
        CHECK(ch.G.rows() == 8);
        CHECK(ch.G.cols() == 2);
        norm2 += ch.G.col(0).squaredNorm();
        re2 += ch.G.col(1).real().squaredNorm();
        im2 += ch.G.col(1).imag().squaredNorm();
    }
    CHECK(std::abs(norm2 / T - 8.0) / 8.0 < 0.02);
    // circular symmetry: each part carries lambda / 2 per entry
    CHECK(re2 / (8.0 * T) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(im2 / (8.0 * T) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("gain scaling is exact for a shared stream")
{
    const auto p1 = flat_profile(1, 1, 6, 1.0);
    const auto p4 = flat_profile(1, 1, 6, 4.0);
    const auto a = draw_channel(p1, 7, 3);
    const auto b = draw_channel(p4, 7, 3);
    CHECK((b.G - 2.0 * a.G).norm() < 1e-14);
}

TEST_CASE("channel determinism")
{
    const auto prof = flat_profile(3, 2, 2, 0.3);
    const auto a = draw_channel(prof, 42, 5);
    const auto b = draw_channel(prof, 42, 5);
    const auto c = draw_channel(prof, 42, 6);
    CHECK(a.G == b.G);
    CHECK(a.block_index == 5);
    CHECK(a.G != c.G);
}

TEST_CASE("sample covariance of a user channel converges at the square-root rate")
{
    LargeScaleProfile prof = flat_profile(1, 2, 2, 1.0);
    prof.gains(0, 1) = 3.0;
    const CMat truth = prof.lambda_diag(0).cast<cplx>().asDiagonal();
    auto err = [&](int T, std::uint64_t seed) {
        double e = 0.0;
        const int reps = 40;
        for (int r = 0; r < reps; ++r) {
            RandomStream rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
            CMat S = CMat::Zero(4, 4);
            for (int t = 0; t < T; ++t) {
                const auto ch = draw_channel(prof, static_cast<std::uint64_t>(t), rng);
                S += ch.G.col(0) * ch.G.col(0).adjoint();
            }
            e += (S / T - truth).norm();
        }
        return e / reps;
    };
    const double ratio = err(1000, 1) / err(10000, 2);
    CHECK(ratio == doctest::Approx(std::sqrt(10.0)).epsilon(0.30));
}
