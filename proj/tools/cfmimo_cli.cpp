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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "cfmimo/harness.hpp"
#include "cfmimo/validation.hpp"

using namespace cfmimo;

namespace {

struct Options {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out = ".";
    std::string format = "csv";
    int threads = 0;
    bool full_scale = false;
};

void add_common(CLI::App* app, Options& o)
{
    app->add_option("--config", o.config, "JSON experiment spec")->check(CLI::ExistingFile);
    app->add_option_function<std::uint64_t>(
        "--seed",
        [&o](const std::uint64_t& s) {
            o.seed = s;
            o.seed_set = true;
        },
        "master seed (overrides the spec)");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--threads", o.threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    app->add_flag("--full-scale", o.full_scale, "M=5, N=50, K=5, N_Sigma=1000 (runs for hours)");
}

ExperimentSpec load(const Options& o)
{
    ExperimentSpec spec = o.config.empty() ? ExperimentSpec{} : load_spec(o.config);
    if (o.full_scale) spec = full_scale_spec(spec);
    if (o.seed_set) spec.base.master_seed = o.seed;
    return spec;
}

void print_summary(const SinrReport& r)
{
    std::printf("%-12s %-4s %-9s %-11s %12s\n", r.sweep_variable.c_str(), "rx", "cov", "source", "sum_rate");
    for (const auto& row : r.rows)
        std::printf("%-12g %-4s %-9s %-11s %12.6f\n", row.sweep_value, to_string(row.scheme), to_string(row.cov_mode),
                    to_string(row.source), row.sum_rate);
    for (const auto& a : r.absent)
        std::printf("%-12g %-4s %-9s %-11s absent: %s\n", a.sweep_value, to_string(a.scheme), to_string(a.cov_mode),
                    to_string(a.source), a.reason.c_str());
}

int write(const SinrReport& r, const Options& o, const std::string& stem)
{
    std::filesystem::create_directories(o.out);
    const ReportFormat f = parse_format(o.format);
    const auto path = (std::filesystem::path(o.out) / (stem + (f == ReportFormat::csv ? ".csv" : ".json"))).string();
    emit_report(r, path, f);
    print_summary(r);
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cfmimo: cell-free massive MIMO uplink with estimated covariances"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo at the first sweep point of the spec");
    auto* theory = app.add_subcommand("theory", "closed-form SINR only");
    auto* sweep = app.add_subcommand("sweep", "run the full experiment spec");
    auto* check = app.add_subcommand("check", "Wishart, estimator and combiner property checks");
    for (auto* s : {simulate, theory, sweep, check}) add_common(s, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (o.threads > 0) omp_set_num_threads(o.threads);
        if (check->parsed()) {
            const ExperimentSpec spec = load(o);
            bool ok = true;
            for (const auto& c : run_checks(spec.base.master_seed)) {
                std::printf("[%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
                ok = ok && c.passed;
            }
            return ok ? 0 : 1;
        }
        ExperimentSpec spec = load(o);
        if (simulate->parsed()) {
            spec.sweep_values.resize(1);
            spec.include_theory = false;
            spec.include_simulation = true;
            return write(run_sweep(spec), o, "simulate");
        }
        if (theory->parsed()) {
            spec.include_theory = true;
            spec.include_simulation = false;
            return write(run_sweep(spec), o, "theory");
        }
        return write(run_sweep(spec), o, "sweep");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cfmimo: error: %s\n", e.what());
        return 2;
    }
}
