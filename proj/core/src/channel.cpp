// SPDX-License-Identifier: Apache-2.0
//
// risdiff: generative placement of reconfigurable intelligent surfaces
// Copyright (C) 2026 The risdiff authors
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

#include "risdiff/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "risdiff/error.hpp"
#include "risdiff/random.hpp"

namespace risdiff {

namespace {

// Rayleigh magnitude with E[r^2] = 1 from one uniform on [0, 1).
inline double rayleigh_magnitude(double u) { return std::sqrt(-std::log(1.0 - u)); }

inline cplx circular_gaussian(Rng& rng) {
    const double r = rayleigh_magnitude(uniform01(rng));
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    return std::polar(r, phi);
}

// Consumes the same two uniforms as circular_gaussian() but only keeps |h|.
inline double circular_gaussian_magnitude(Rng& rng) {
    const double r = rayleigh_magnitude(uniform01(rng));
    static_cast<void>(rng());
    return r;
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " must be positive and finite");
    }
}

}  // namespace

double unit_gain_constant(double lambda, double g_t, double g_r) {
    require_positive(lambda, "lambda");
    require_positive(g_t, "g_t");
    require_positive(g_r, "g_r");
    const double amplitude = lambda * std::sqrt(g_t * g_r) / (4.0 * std::numbers::pi);
    return amplitude * amplitude;
}

double RadioParams::c_const() const { return unit_gain_constant(lambda, g_t, g_r); }

void RadioParams::validate() const {
    require_positive(lambda, "lambda");
    require_positive(g_t, "g_t");
    require_positive(g_r, "g_r");
    require_positive(alpha, "alpha");
    require_positive(p_tx, "p_tx");
    require_positive(noise_power, "noise_power");
    if (!(gamma_th >= 0.0) || !std::isfinite(gamma_th)) {
        throw ConfigError("gamma_th must be non-negative and finite");
    }
    if (n_elements == 0) {
        throw ConfigError("n_elements must be positive");
    }
}

double direct_path_loss(double d, const RadioParams& params) {
    if (!(d > 0.0)) {
        throw DomainError("direct path loss is singular at zero distance");
    }
    return params.c_const() * std::pow(d, -params.alpha);
}

double cascaded_path_loss(double d_bl, double d_lk, const RadioParams& params) {
    if (!(d_bl > 0.0) || !(d_lk > 0.0)) {
        throw DomainError("cascaded path loss is singular at zero hop distance");
    }
    return params.c_const() * std::pow(d_bl * d_lk, -params.alpha);
}

std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t j) noexcept { return mix_seed(seed, j); }

FadingDraw sample_fading(const Scenario& scenario, const RadioParams& params, std::uint64_t seed) {
    FadingDraw draw;
    draw.n_users = scenario.users.size();
    draw.n_sites = scenario.grid_spec.size();
    draw.n_elements = params.n_elements;
    draw.g_direct.resize(draw.n_users);
    draw.h_bs_ris.resize(draw.n_sites * draw.n_elements);
    draw.h_ris_user.resize(draw.n_sites * draw.n_users * draw.n_elements);

    Rng rng{seed};
    for (auto& g : draw.g_direct) {
        g = circular_gaussian(rng);
    }
    const std::size_t n = draw.n_elements;
    for (std::size_t site = 0; site < draw.n_sites; ++site) {
        for (std::size_t e = 0; e < n; ++e) {
            draw.h_bs_ris[site * n + e] = circular_gaussian(rng);
        }
        for (std::size_t k = 0; k < draw.n_users; ++k) {
            cplx* row = draw.h_ris_user.data() + (site * draw.n_users + k) * n;
            for (std::size_t e = 0; e < n; ++e) {
                row[e] = circular_gaussian(rng);
            }
        }
    }
    return draw;
}

LinkBudget link_budget(const Scenario& scenario, const Grid& grid, const RadioParams& params) {
    LinkBudget budget;
    budget.n_users = scenario.users.size();
    budget.n_sites = grid.size();
    budget.direct.resize(budget.n_users);
    budget.cascade.resize(budget.n_sites * budget.n_users);

    for (std::size_t k = 0; k < budget.n_users; ++k) {
        const Point3& u = scenario.users[k];
        const double eta_d = direct_path_loss(distance(scenario.bs, u), params);
        const bool los = los_indicator(scenario.bs, u, scenario.obstacles);
        budget.direct[k] = los ? std::sqrt(eta_d) : 0.0;
    }
    for (std::size_t site = 0; site < budget.n_sites; ++site) {
        const Point3& r = grid.points[site];
        const double d_bl = distance(scenario.bs, r);
        const bool bs_hop = !params.gate_cascade || los_indicator(scenario.bs, r, scenario.obstacles);
        for (std::size_t k = 0; k < budget.n_users; ++k) {
            const Point3& u = scenario.users[k];
            const double eta_r = cascaded_path_loss(d_bl, distance(r, u), params);
            const bool open = bs_hop && (!params.gate_cascade || los_indicator(r, u, scenario.obstacles));
            budget.cascade[site * budget.n_users + k] = open ? std::sqrt(eta_r) : 0.0;
        }
    }
    return budget;
}

cplx received_amplitude(const Scenario& scenario, const DeploymentPlan& plan, std::size_t user,
                        const FadingDraw& fading, const RadioParams& params, PhaseMode mode,
                        const PhaseConfig* phases) {
    if (user >= scenario.users.size()) {
        throw ArgumentError("user index " + std::to_string(user) + " out of range");
    }
    if (fading.n_users != scenario.users.size() || fading.n_elements != params.n_elements) {
        throw ArgumentError("fading draw does not match the scenario");
    }
    const Point3& u = scenario.users[user];
    const double direct_gain =
        los_indicator(scenario.bs, u, scenario.obstacles)
            ? std::sqrt(direct_path_loss(distance(scenario.bs, u), params))
            : 0.0;
    const cplx direct = direct_gain * fading.g_direct[user];

    auto cascade_gain = [&](std::size_t l) {
        const Point3& r = plan.coords[l];
        if (params.gate_cascade && (!los_indicator(scenario.bs, r, scenario.obstacles) ||
                                    !los_indicator(r, u, scenario.obstacles))) {
            return 0.0;
        }
        return std::sqrt(cascaded_path_loss(distance(scenario.bs, r), distance(r, u), params));
    };

    if (mode == PhaseMode::optimal_cophase) {
        double magnitude = std::abs(direct);
        for (std::size_t l = 0; l < plan.size(); ++l) {
            const double gain = cascade_gain(l);
            if (gain == 0.0) {
                continue;
            }
            const auto hb = fading.bs_to_site(plan.indices[l]);
            const auto hu = fading.site_to_user(plan.indices[l], user);
            double coherent = 0.0;
            for (std::size_t e = 0; e < hb.size(); ++e) {
                coherent += std::abs(hu[e]) * std::abs(hb[e]);
            }
            magnitude += gain * coherent;
        }
        const double phase = direct == cplx{} ? 0.0 : std::arg(direct);
        return std::polar(magnitude, phase);
    }

    if (phases == nullptr || phases->theta.size() != plan.size()) {
        throw ArgumentError("explicit phase mode needs one phase row per RIS");
    }
    cplx zeta = direct;
    for (std::size_t l = 0; l < plan.size(); ++l) {
        const auto& theta = phases->theta[l];
        if (theta.size() != params.n_elements) {
            throw ArgumentError("phase row length must equal n_elements");
        }
        const double gain = cascade_gain(l);
        if (gain == 0.0) {
            continue;
        }
        const auto hb = fading.bs_to_site(plan.indices[l]);
        const auto hu = fading.site_to_user(plan.indices[l], user);
        cplx reflected{};
        for (std::size_t e = 0; e < hb.size(); ++e) {
            reflected += std::conj(hu[e]) * std::polar(1.0, theta[e]) * hb[e];
        }
        zeta += gain * reflected;
    }
    return zeta;
}

PhaseConfig cophase_config(const DeploymentPlan& plan, std::size_t user, const FadingDraw& fading) {
    const double target = std::arg(fading.g_direct.at(user));
    const double two_pi = 2.0 * std::numbers::pi;
    PhaseConfig config;
    config.theta.reserve(plan.size());
    for (std::size_t site : plan.indices) {
        const auto hb = fading.bs_to_site(site);
        const auto hu = fading.site_to_user(site, user);
        std::vector<double> row(hb.size());
        for (std::size_t e = 0; e < hb.size(); ++e) {
            double theta = target - std::arg(std::conj(hu[e]) * hb[e]);
            theta = std::fmod(theta, two_pi);
            row[e] = theta < 0.0 ? theta + two_pi : theta;
        }
        config.theta.push_back(std::move(row));
    }
    return config;
}

double snr(cplx zeta, const RadioParams& params) {
    return params.p_tx * std::norm(zeta) / params.noise_power;
}

AmplitudeTable::AmplitudeTable(const Scenario& scenario, const RadioParams& params,
                               std::size_t n_mc, std::uint64_t seed)
    : n_draws_(n_mc),
      n_users_(scenario.users.size()),
      n_sites_(scenario.grid_spec.size()),
      snr_scale_(params.p_tx / params.noise_power),
      gamma_th_(params.gamma_th) {
    if (n_mc == 0) {
        throw ArgumentError("Monte-Carlo sample count must be at least 1");
    }
    const Grid grid = scenario.grid();
    const LinkBudget budget = link_budget(scenario, grid, params);
    const std::size_t n = params.n_elements;

    direct_.resize(n_draws_ * n_users_);
    cascade_.resize(n_draws_ * n_sites_ * n_users_);
    std::vector<double> hb(n);
    for (std::size_t j = 0; j < n_draws_; ++j) {
        Rng rng{draw_seed(seed, j)};
        for (std::size_t k = 0; k < n_users_; ++k) {
            direct_[j * n_users_ + k] = budget.direct[k] * circular_gaussian_magnitude(rng);
        }
        for (std::size_t site = 0; site < n_sites_; ++site) {
            for (std::size_t e = 0; e < n; ++e) {
                hb[e] = circular_gaussian_magnitude(rng);
            }
            double* out = cascade_.data() + (j * n_sites_ + site) * n_users_;
            for (std::size_t k = 0; k < n_users_; ++k) {
                double coherent = 0.0;
                for (std::size_t e = 0; e < n; ++e) {
                    coherent += circular_gaussian_magnitude(rng) * hb[e];
                }
                out[k] = budget.cascade[site * n_users_ + k] * coherent;
            }
        }
    }
}

double AmplitudeTable::sum_snr(std::span<const std::size_t> sites) const {
    double total = 0.0;
    for (std::size_t j = 0; j < n_draws_; ++j) {
        const double* a = direct_.data() + j * n_users_;
        const double* b = cascade_.data() + j * n_sites_ * n_users_;
        for (std::size_t k = 0; k < n_users_; ++k) {
            double amp = a[k];
            for (std::size_t site : sites) {
                amp += b[site * n_users_ + k];
            }
            total += amp * amp;
        }
    }
    return snr_scale_ * total / static_cast<double>(n_draws_);
}

double AmplitudeTable::coverage(std::span<const std::size_t> sites) const {
    return coverage(sites, gamma_th_);
}

double AmplitudeTable::coverage(std::span<const std::size_t> sites, double gamma_th) const {
    if (n_users_ == 0) {
        return 0.0;
    }
    std::size_t covered = 0;
    for (std::size_t j = 0; j < n_draws_; ++j) {
        const double* a = direct_.data() + j * n_users_;
        const double* b = cascade_.data() + j * n_sites_ * n_users_;
        for (std::size_t k = 0; k < n_users_; ++k) {
            double amp = a[k];
            for (std::size_t site : sites) {
                amp += b[site * n_users_ + k];
            }
            if (snr_scale_ * amp * amp >= gamma_th) {
                ++covered;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(n_draws_ * n_users_);
}

double coverage_probability(const Scenario& scenario, const DeploymentPlan& plan,
                            const RadioParams& params, std::size_t n_mc, std::uint64_t seed) {
    const AmplitudeTable table(scenario, params, n_mc, seed);
    return table.coverage(plan.indices);
}

double expected_sum_snr(const Scenario& scenario, const DeploymentPlan& plan,
                        const RadioParams& params, std::size_t n_mc, std::uint64_t seed) {
    const AmplitudeTable table(scenario, params, n_mc, seed);
    return table.sum_snr(plan.indices);
}

}  // namespace risdiff
