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

#include "cfmimo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "cfmimo/linkproc.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/theory.hpp"

namespace cfmimo {

const char* to_string(SweepVariable v)
{
    switch (v) {
    case SweepVariable::n_lambda: return "n_lambda";
    case SweepVariable::n_sigma: return "n_sigma";
    case SweepVariable::num_pilots: return "num_pilots";
    case SweepVariable::snr_db: return "snr_db";
    }
    return "?";
}

SweepVariable parse_sweep_variable(const std::string& s)
{
    for (auto v : {SweepVariable::n_lambda, SweepVariable::n_sigma, SweepVariable::num_pilots, SweepVariable::snr_db})
        if (s == to_string(v)) return v;
    throw ConfigError("unknown sweep_variable '" + s + "' (expected n_lambda, n_sigma, num_pilots or snr_db)");
}

const char* to_string(Source s) { return s == Source::simulated ? "simulated" : "theoretical"; }

Source parse_source(const std::string& s)
{
    if (s == "simulated") return Source::simulated;
    if (s == "theoretical") return Source::theoretical;
    throw ConfigError("unknown source '" + s + "'");
}

ReportFormat parse_format(const std::string& s)
{
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

void validate_spec(const ExperimentSpec& spec)
{
    if (spec.sweep_values.empty()) throw ConfigError("sweep_values must be nonempty");
    for (std::size_t i = 1; i < spec.sweep_values.size(); ++i)
        if (!(spec.sweep_values[i] > spec.sweep_values[i - 1]))
            throw ConfigError("sweep_values must be strictly increasing");
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
    if (spec.num_drops < 1) throw ConfigError("num_drops must be >= 1");
    if (spec.schemes.empty()) throw ConfigError("schemes must be nonempty");
    if (spec.cov_modes.empty()) throw ConfigError("cov_modes must be nonempty");
    if (!spec.include_simulation && !spec.include_theory)
        throw ConfigError("nothing to run: both simulation and theory are disabled");
    if (spec.sweep_variable != SweepVariable::snr_db)
        for (double v : spec.sweep_values)
            if (v != std::floor(v) || v < 1.0)
                throw ConfigError(std::string("sweep values of ") + to_string(spec.sweep_variable) +
                                  " must be positive integers");
    validate(spec.base);
}

ExperimentSpec spec_from_json(const nlohmann::json& j)
{
    static const std::set<std::string> known = {"base",    "sweep_variable", "sweep_values", "schemes",
                                                "cov_modes", "include_theory", "include_simulation", "trials", "num_drops"};
    if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown experiment spec field '" + key + "'");
    ExperimentSpec s;
    try {
        if (j.contains("base")) s.base = config_from_json(j.at("base"));
        if (j.contains("sweep_variable")) s.sweep_variable = parse_sweep_variable(j.at("sweep_variable").get<std::string>());
        if (j.contains("sweep_values")) s.sweep_values = j.at("sweep_values").get<std::vector<double>>();
        if (j.contains("schemes")) {
            s.schemes.clear();
            for (const auto& x : j.at("schemes")) s.schemes.push_back(parse_scheme(x.get<std::string>()));
        }
        if (j.contains("cov_modes")) {
            s.cov_modes.clear();
            for (const auto& x : j.at("cov_modes")) s.cov_modes.push_back(parse_cov_mode(x.get<std::string>()));
        }
        if (j.contains("include_theory")) s.include_theory = j.at("include_theory").get<bool>();
        if (j.contains("include_simulation")) s.include_simulation = j.at("include_simulation").get<bool>();
        if (j.contains("trials")) s.trials = j.at("trials").get<long>();
        if (j.contains("num_drops")) s.num_drops = j.at("num_drops").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed experiment spec: ") + e.what());
    }
    std::sort(s.schemes.begin(), s.schemes.end());
    s.schemes.erase(std::unique(s.schemes.begin(), s.schemes.end()), s.schemes.end());
    std::sort(s.cov_modes.begin(), s.cov_modes.end());
    s.cov_modes.erase(std::unique(s.cov_modes.begin(), s.cov_modes.end()), s.cov_modes.end());
    validate_spec(s);
    return s;
}

nlohmann::json spec_to_json(const ExperimentSpec& s)
{
    nlohmann::json j;
    j["base"] = config_to_json(s.base);
    j["sweep_variable"] = to_string(s.sweep_variable);
    j["sweep_values"] = s.sweep_values;
    j["schemes"] = nlohmann::json::array();
    for (auto x : s.schemes) j["schemes"].push_back(to_string(x));
    j["cov_modes"] = nlohmann::json::array();
    for (auto x : s.cov_modes) j["cov_modes"].push_back(to_string(x));
    j["include_theory"] = s.include_theory;
    j["include_simulation"] = s.include_simulation;
    j["trials"] = s.trials;
    j["num_drops"] = s.num_drops;
    return j;
}

ExperimentSpec load_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment spec '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
    return spec_from_json(j);
}

ExperimentSpec full_scale_spec(const ExperimentSpec& spec)
{
    ExperimentSpec s = spec;
    s.base.num_aps = 5;
    s.base.antennas_per_ap = 50;
    s.base.num_users = 5;
    s.base.num_pilots = std::max(s.base.num_pilots, 5);
    s.base.pilot_len = std::max(s.base.pilot_len, s.base.num_pilots);
    s.base.n_sigma = 1000;
    return s;
}

namespace {

using RowKey = std::tuple<double, Scheme, CovMode, Source>;

struct DropResult {
    std::vector<double> gamma;
    std::vector<double> rate;
    std::vector<double> se;
};

SystemConfig config_at(const ExperimentSpec& spec, double v)
{
    SystemConfig c = spec.base;
    switch (spec.sweep_variable) {
    case SweepVariable::n_lambda: c.n_lambda = static_cast<int>(v); break;
    case SweepVariable::n_sigma: c.n_sigma = static_cast<int>(v); break;
    case SweepVariable::num_pilots: c.num_pilots = static_cast<int>(v); break;
    case SweepVariable::snr_db: break;
    }
    return c;
}

double rho_at(const ExperimentSpec& spec, const SystemConfig& c, const LargeScaleProfile& profile, double v)
{
    if (spec.sweep_variable == SweepVariable::snr_db) return calibrate_tx_power(profile, c.noise_power, v);
    return effective_tx_power(c, profile);
}

DropResult to_drop(const std::vector<double>& gamma, const std::vector<double>& se, const SystemConfig& c)
{
    DropResult d;
    d.gamma = gamma;
    d.se = se;
    for (double g : gamma) d.rate.push_back(achievable_rate(g, c.pilot_len, c.coherence_len));
    return d;
}

} // namespace

SinrReport run_sweep(const ExperimentSpec& spec)
{
    validate_spec(spec);
    const std::uint64_t master = spec.base.master_seed;

    std::vector<LargeScaleProfile> profiles;
    for (int d = 0; d < spec.num_drops; ++d) {
        RandomStream rng(derive_seed(master, {0x67656f, static_cast<std::uint64_t>(d)}));
        profiles.push_back(build_profile(spec.base, rng));
    }

    std::map<RowKey, std::vector<DropResult>> results;
    std::map<RowKey, std::string> failures;
    std::map<RowKey, double> seconds;
    using clock = std::chrono::steady_clock;

    for (double v : spec.sweep_values) {
        const SystemConfig cfg = config_at(spec, v);
        const PilotPlan plan = assign_pilots(cfg.num_users, cfg.num_pilots, default_policy(cfg.num_users, cfg.num_pilots));
        for (CovMode mode : spec.cov_modes) {
            std::string sim_error;
            try {
                validate(cfg, {mode == CovMode::estimated, false});
            } catch (const ConfigError& e) {
                sim_error = e.what();
            }
            std::string th_error;
            if (spec.include_theory) {
                try {
                    validate(cfg, {false, mode == CovMode::estimated});
                } catch (const ConfigError& e) {
                    th_error = e.what();
                }
            }

            for (int d = 0; d < spec.num_drops && sim_error.empty() && spec.include_simulation; ++d) {
                const LargeScaleProfile& profile = profiles[static_cast<std::size_t>(d)];
                UatfSettings st;
                st.cov_mode = mode;
                st.trials = spec.trials;
                st.rho = rho_at(spec, cfg, profile, v);
                st.sigma2 = cfg.noise_power;
                st.n_sigma = cfg.n_sigma;
                st.n_lambda = cfg.n_lambda;
                st.seed = derive_seed(master, {0x6d63, static_cast<std::uint64_t>(d)});
                // Run schemes together; fall back to one at a time so that one
                // failing combiner does not hide the others.
                const auto t0 = clock::now();
                try {
                    st.schemes = spec.schemes;
                    const auto est = uatf_monte_carlo(profile, plan, st);
                    const double dt = std::chrono::duration<double>(clock::now() - t0).count();
                    for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
                        std::vector<double> g, se;
                        for (const auto& e : est[s]) {
                            g.push_back(e.gamma);
                            se.push_back(e.std_error);
                        }
                        const RowKey key{v, spec.schemes[s], mode, Source::simulated};
                        results[key].push_back(to_drop(g, se, cfg));
                        seconds[key] += dt / static_cast<double>(spec.schemes.size());
                    }
                } catch (const std::exception&) {
                    for (Scheme scheme : spec.schemes) {
                        const RowKey key{v, scheme, mode, Source::simulated};
                        if (failures.count(key)) continue;
                        const auto t1 = clock::now();
                        try {
                            st.schemes = {scheme};
                            const auto est = uatf_monte_carlo(profile, plan, st).front();
                            std::vector<double> g, se;
                            for (const auto& e : est) {
                                g.push_back(e.gamma);
                                se.push_back(e.std_error);
                            }
                            results[key].push_back(to_drop(g, se, cfg));
                            seconds[key] += std::chrono::duration<double>(clock::now() - t1).count();
                        } catch (const std::exception& e) {
                            failures[key] = e.what();
                        }
                    }
                }
            }
            if (!sim_error.empty() && spec.include_simulation)
                for (Scheme scheme : spec.schemes) failures[{v, scheme, mode, Source::simulated}] = sim_error;

            if (!spec.include_theory) continue;
            for (Scheme scheme : spec.schemes) {
                const RowKey key{v, scheme, mode, Source::theoretical};
                if (!th_error.empty()) {
                    failures[key] = th_error;
                    continue;
                }
                for (int d = 0; d < spec.num_drops && !failures.count(key); ++d) {
                    const LargeScaleProfile& profile = profiles[static_cast<std::size_t>(d)];
                    TheoryParams tp = theory_params(cfg, profile, mode);
                    tp.rho = rho_at(spec, cfg, profile, v);
                    const auto t0 = clock::now();
                    try {
                        std::vector<double> g;
                        if (scheme == Scheme::mrc) {
                            for (const auto& f : mrc_closed_form(profile, plan, tp)) g.push_back(f.gamma);
                        } else {
                            g = zf_closed_form(profile, plan, tp).gamma;
                        }
                        results[key].push_back(to_drop(g, std::vector<double>(g.size(), 0.0), cfg));
                        seconds[key] += std::chrono::duration<double>(clock::now() - t0).count();
                    } catch (const std::exception& e) {
                        failures[key] = e.what();
                    }
                }
            }
        }
    }

    SinrReport report;
    report.sweep_variable = to_string(spec.sweep_variable);
    for (const auto& [key, drops] : results) {
        if (failures.count(key)) continue;
        ReportRow row;
        std::tie(row.sweep_value, row.scheme, row.cov_mode, row.source) = key;
        row.seed = master;
        const std::size_t K = drops.front().gamma.size();
        const double D = static_cast<double>(drops.size());
        row.gamma.assign(K, 0.0);
        row.rate.assign(K, 0.0);
        row.std_error.assign(K, 0.0);
        for (const auto& dr : drops)
            for (std::size_t k = 0; k < K; ++k) {
                row.gamma[k] += dr.gamma[k];
                row.rate[k] += dr.rate[k];
                row.std_error[k] += dr.se[k] * dr.se[k];
            }
        for (std::size_t k = 0; k < K; ++k) {
            row.gamma[k] /= D;
            row.rate[k] /= D;
            row.std_error[k] = std::sqrt(row.std_error[k]) / D;
        }
        for (double r : row.rate) row.sum_rate += r;
        report.rows.push_back(std::move(row));
        report.wall_time.push_back(seconds[key]);
    }
    for (const auto& [key, reason] : failures) {
        AbsentRow a;
        std::tie(a.sweep_value, a.scheme, a.cov_mode, a.source) = key;
        a.reason = reason;
        report.absent.push_back(std::move(a));
    }
    return report;
}

const ReportRow* find_row(const SinrReport& report, double sweep_value, Scheme scheme, CovMode mode, Source source)
{
    for (const auto& r : report.rows)
        if (r.sweep_value == sweep_value && r.scheme == scheme && r.cov_mode == mode && r.source == source) return &r;
    return nullptr;
}

bool same_data(const SinrReport& a, const SinrReport& b)
{
    if (a.sweep_variable != b.sweep_variable || a.rows.size() != b.rows.size() || a.absent.size() != b.absent.size())
        return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& x = a.rows[i];
        const auto& y = b.rows[i];
        if (x.sweep_value != y.sweep_value || x.scheme != y.scheme || x.cov_mode != y.cov_mode ||
            x.source != y.source || x.gamma != y.gamma || x.rate != y.rate || x.std_error != y.std_error ||
            x.sum_rate != y.sum_rate || x.seed != y.seed)
            return false;
    }
    for (std::size_t i = 0; i < a.absent.size(); ++i) {
        const auto& x = a.absent[i];
        const auto& y = b.absent[i];
        if (x.sweep_value != y.sweep_value || x.scheme != y.scheme || x.cov_mode != y.cov_mode ||
            x.source != y.source || x.reason != y.reason)
            return false;
    }
    return true;
}

namespace {

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

std::string report_to_csv(const SinrReport& report)
{
    std::ostringstream out;
    out << "sweep_value,scheme,cov_mode,source,user,gamma,rate,sum_rate,stderr,seed\n";
    for (const auto& r : report.rows)
        for (std::size_t k = 0; k < r.gamma.size(); ++k)
            out << fmt(r.sweep_value) << ',' << to_string(r.scheme) << ',' << to_string(r.cov_mode) << ','
                << to_string(r.source) << ',' << k << ',' << fmt(r.gamma[k]) << ',' << fmt(r.rate[k]) << ','
                << fmt(r.sum_rate) << ',' << fmt(r.std_error[k]) << ',' << r.seed << '\n';
    return out.str();
}

nlohmann::json report_to_json(const SinrReport& report)
{
    nlohmann::json j;
    j["sweep_variable"] = report.sweep_variable;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows)
        j["rows"].push_back({{"sweep_value", r.sweep_value},
                             {"scheme", to_string(r.scheme)},
                             {"cov_mode", to_string(r.cov_mode)},
                             {"source", to_string(r.source)},
                             {"gamma", r.gamma},
                             {"rate", r.rate},
                             {"std_error", r.std_error},
                             {"sum_rate", r.sum_rate},
                             {"seed", r.seed}});
    j["absent"] = nlohmann::json::array();
    for (const auto& a : report.absent)
        j["absent"].push_back({{"sweep_value", a.sweep_value},
                               {"scheme", to_string(a.scheme)},
                               {"cov_mode", to_string(a.cov_mode)},
                               {"source", to_string(a.source)},
                               {"reason", a.reason}});
    j["timing"] = {{"wall_time", report.wall_time}};
    return j;
}

SinrReport report_from_json(const nlohmann::json& j)
{
    SinrReport r;
    try {
        r.sweep_variable = j.at("sweep_variable").get<std::string>();
        for (const auto& x : j.at("rows")) {
            ReportRow row;
            row.sweep_value = x.at("sweep_value").get<double>();
            row.scheme = parse_scheme(x.at("scheme").get<std::string>());
            row.cov_mode = parse_cov_mode(x.at("cov_mode").get<std::string>());
            row.source = parse_source(x.at("source").get<std::string>());
            row.gamma = x.at("gamma").get<std::vector<double>>();
            row.rate = x.at("rate").get<std::vector<double>>();
            row.std_error = x.at("std_error").get<std::vector<double>>();
            row.sum_rate = x.at("sum_rate").get<double>();
            row.seed = x.at("seed").get<std::uint64_t>();
            r.rows.push_back(std::move(row));
        }
        for (const auto& x : j.at("absent")) {
            AbsentRow a;
            a.sweep_value = x.at("sweep_value").get<double>();
            a.scheme = parse_scheme(x.at("scheme").get<std::string>());
            a.cov_mode = parse_cov_mode(x.at("cov_mode").get<std::string>());
            a.source = parse_source(x.at("source").get<std::string>());
            a.reason = x.at("reason").get<std::string>();
            r.absent.push_back(std::move(a));
        }
        if (j.contains("timing")) r.wall_time = j.at("timing").at("wall_time").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
    return r;
}

void emit_report(const SinrReport& report, const std::string& path, ReportFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    if (format == ReportFormat::csv)
        out << report_to_csv(report);
    else
        out << report_to_json(report).dump(2) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

SinrReport parse_report_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
    return report_from_json(j);
}

} // namespace cfmimo
