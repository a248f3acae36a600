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

#include "cfmimo/rng.hpp"

#include <string>

namespace cfmimo {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path)
{
    std::uint64_t h = splitmix64(root);
    for (std::uint64_t p : path)
        h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

const char* to_string(Scheme s) { return s == Scheme::mrc ? "MRC" : "ZF"; }
const char* to_string(CovMode m) { return m == CovMode::perfect ? "perfect" : "estimated"; }

Scheme parse_scheme(const std::string& s)
{
    if (s == "MRC" || s == "mrc") return Scheme::mrc;
    if (s == "ZF" || s == "zf") return Scheme::zf;
    throw ConfigError("unknown combining scheme '" + s + "' (expected MRC or ZF)");
}

CovMode parse_cov_mode(const std::string& s)
{
    if (s == "perfect") return CovMode::perfect;
    if (s == "estimated") return CovMode::estimated;
    throw ConfigError("unknown covariance mode '" + s + "' (expected perfect or estimated)");
}

} // namespace cfmimo
