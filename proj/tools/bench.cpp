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

// Wall-clock comparison of the serial reference and the OpenMP kernel.

#include <chrono>
#include <cstdio>

#include <CLI11.hpp>
#include <omp.h>

#include "cfmimo/linkproc.hpp"
#include "cfmimo/rng.hpp"

using namespace cfmimo;

int main(int argc, char** argv)
{
    long trials = 20000;
    int threads = 0;
    CLI::App app{"serial vs OpenMP Monte Carlo timing"};
    app.add_option("--trials", trials, "perfect-covariance trials (estimated runs a tenth)")->check(CLI::Range(10L, 100000000L));
    app.add_option("--threads", threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);
    SystemConfig cfg;
    cfg.num_aps = 2;
    cfg.antennas_per_ap = 4;
    cfg.num_users = 4;
    cfg.num_pilots = 4;
    RandomStream rng(7);
    const LargeScaleProfile prof = build_profile(cfg, rng);
    const PilotPlan plan = assign_pilots(4, 4, PilotPolicy::orthogonal);

    UatfSettings st;
    st.schemes = {Scheme::mrc, Scheme::zf};
    st.rho = effective_tx_power(cfg, prof);
    st.n_sigma = 64;
    st.n_lambda = 64;
    st.seed = 11;

    std::printf("%-10s %-8s %10s %12s %10s\n", "cov", "exec", "trials", "seconds", "speedup");
    for (CovMode mode : {CovMode::perfect, CovMode::estimated}) {
        st.cov_mode = mode;
        st.trials = mode == CovMode::perfect ? trials : trials / 10;
        double serial = 0.0;
        for (Execution ex : {Execution::serial, Execution::parallel}) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto r = uatf_monte_carlo(prof, plan, st, ex);
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (ex == Execution::serial) serial = dt;
            std::printf("%-10s %-8s %10ld %12.4f %10.2f   gamma[0]=%.6f\n", to_string(mode),
                        ex == Execution::serial ? "serial" : "openmp", st.trials, dt, serial / dt, r[0][0].gamma);
        }
    }
    std::printf("threads: %d\n", omp_get_max_threads());
    return 0;
}
