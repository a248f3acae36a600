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

// Independent reference values used by the tests. Nothing here calls into
// the library's numerical code paths.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

/// Equal-gain single-cell reference: every user has Lambda = lambda I over
/// `mn` antennas, orthogonal pilots, perfect covariances, pilot SNR equal to
/// the data SNR rho * lambda / sigma2.
inline double mmse_quality(double snr) { return snr / (snr + 1.0); }

/// UatF MRC SINR: mn c snr / (K snr + 1).
inline double mrc_equal_gain(int mn, int K, double snr)
{
    return mn * mmse_quality(snr) * snr / (K * snr + 1.0);
}

/// UatF ZF SINR: (mn - K) c snr / (K snr (1 - c) + 1).
inline double zf_equal_gain(int mn, int K, double snr)
{
    const double c = mmse_quality(snr);
    return (mn - K) * c * snr / (K * snr * (1.0 - c) + 1.0);
}

/// Complex Wishart CW(n, I_m) moments written from the entrywise second
/// moments E[W^-1_ij W^-1_kl] = ((n-m) d_ij d_kl + d_il d_kj) / ((n-m)((n-m)^2-1)).
inline double wishart_tr_inv(double n, double m) { return m / (n - m); }
inline double wishart_tr_inv_sq(double n, double m)
{
    const double d = n - m;
    return (d * m + m * m) / (d * (d * d - 1.0));
}
/// E|tr(W^-1 A)|^2 for A given by |tr A|^2 and tr(A A^H).
inline double wishart_quad(double n, double m, double abs_tr_sq, double tr_aah)
{
    const double d = n - m;
    return (d * abs_tr_sq + tr_aah) / (d * (d * d - 1.0));
}

/// mu factors computed through the Wishart moments they stand for:
/// mu1 = n^2 E[tr W^-2] / m, mu2 = n^2 / ((n-m)^2 - 1).
inline double mu1(double n, double m) { return n * n * wishart_tr_inv_sq(n, m) / m; }
inline double mu2(double n, double m) { return n * n / ((n - m) * (n - m) - 1.0); }

/// Area-uniform disk: P(r <= x) = (x / R)^2.
inline double disk_radius_cdf(double x, double R) { return (x / R) * (x / R); }

/// Pearson chi-square upper quantile for 7 degrees of freedom at 0.001.
inline constexpr double kChi2_7_999 = 24.3219;

/// Spearman rank correlation without tie handling.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            int below = 0;
            for (std::size_t j = 0; j < v.size(); ++j)
                if (v[j] < v[i]) ++below;
            r[i] = below;
        }
        return r;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

} // namespace oracle
