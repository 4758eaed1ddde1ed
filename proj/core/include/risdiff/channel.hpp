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

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "risdiff/scenario.hpp"

namespace risdiff {

using cplx = std::complex<double>;

/// Physical-layer constants. None are given by the model's source, so every
/// default here is a configurable choice.
struct RadioParams {
    double lambda = 0.1;         // carrier wavelength [m]
    double g_t = 1.0;            // transmit antenna gain (linear)
    double g_r = 1.0;            // receive antenna gain (linear)
    double alpha = 2.7;          // path-loss exponent
    double p_tx = 1.0;           // transmit power [W]
    double noise_power = 1e-11;  // sigma^2 [W]
    double gamma_th = 10.0;      // coverage SNR threshold (linear)
    std::size_t n_elements = 64; // reflecting elements per RIS
    bool gate_cascade = true;    // drop a reflected path when either hop is blocked

    /// Unit-distance gain C.
    double c_const() const;
    /// Throws ConfigError when any constant is non-positive or non-finite.
    void validate() const;

    friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

/// C = (lambda * sqrt(G_t G_r) / (4 pi))^2. Throws ConfigError on non-positive input.
double unit_gain_constant(double lambda, double g_t, double g_r);

/// eta_d = C d^-alpha. Throws DomainError for d <= 0.
double direct_path_loss(double d, const RadioParams& params);

/// eta_r = C (d_bl d_lk)^-alpha. Throws DomainError for a zero hop.
double cascaded_path_loss(double d_bl, double d_lk, const RadioParams& params);

/// One realization of the small-scale fading. Channels are drawn for every
/// candidate site, so a RIS placed at grid point i sees the same draw in every
/// plan that uses it (common random numbers).
struct FadingDraw {
    std::size_t n_users = 0;
    std::size_t n_sites = 0;
    std::size_t n_elements = 0;
    std::vector<cplx> g_direct;    // [k]
    std::vector<cplx> h_bs_ris;    // [site][n]
    std::vector<cplx> h_ris_user;  // [site][k][n]

    std::span<const cplx> bs_to_site(std::size_t site) const {
        return {h_bs_ris.data() + site * n_elements, n_elements};
    }
    std::span<const cplx> site_to_user(std::size_t site, std::size_t k) const {
        return {h_ris_user.data() + (site * n_users + k) * n_elements, n_elements};
    }
};

/// i.i.d. CN(0,1) entries, a deterministic function of the seed. Entries are
/// drawn as r e^{j phi} with r = sqrt(-ln U1), phi = 2 pi U2, in the order
/// g[k], then per site: h_bs_ris[site][:], h_ris_user[site][k][:].
FadingDraw sample_fading(const Scenario& scenario, const RadioParams& params, std::uint64_t seed);

/// Seed of draw j in a Monte-Carlo estimate seeded with `seed`.
std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t j) noexcept;

/// Explicit per-element phase shifts theta[l][n], one row per RIS in plan order.
struct PhaseConfig {
    std::vector<std::vector<double>> theta;
};

enum class PhaseMode { optimal_cophase, explicit_phases };

/// Received baseband amplitude zeta_k. In optimal_cophase mode every reflected
/// element term is rotated onto the direct-path phase so magnitudes add; in
/// explicit mode the sum over RIS of sqrt(eta_r) h_lk^H Phi_l h_bl is
/// evaluated as written. Throws ArgumentError on a bad user index.
cplx received_amplitude(const Scenario& scenario, const DeploymentPlan& plan, std::size_t user,
                        const FadingDraw& fading, const RadioParams& params,
                        PhaseMode mode = PhaseMode::optimal_cophase,
                        const PhaseConfig* phases = nullptr);

/// Phases that co-align every element product with the direct path of `user`.
PhaseConfig cophase_config(const DeploymentPlan& plan, std::size_t user, const FadingDraw& fading);

/// gamma = P |zeta|^2 / sigma^2.
double snr(cplx zeta, const RadioParams& params);

/// Deterministic large-scale quantities of a scenario: delta_k sqrt(eta_d)
/// per user and gate * sqrt(eta_r) per (site, user).
struct LinkBudget {
    std::size_t n_users = 0;
    std::size_t n_sites = 0;
    std::vector<double> direct;   // [k]
    std::vector<double> cascade;  // [site][k]
};

LinkBudget link_budget(const Scenario& scenario, const Grid& grid, const RadioParams& params);

/// Per-draw co-phased amplitude terms for every (site, user). Built once per
/// scenario and seed; any plan is then scored without redrawing fading, which
/// is how common random numbers are shared across compared plans.
class AmplitudeTable {
public:
    AmplitudeTable(const Scenario& scenario, const RadioParams& params, std::size_t n_mc,
                   std::uint64_t seed);

    std::size_t n_draws() const noexcept { return n_draws_; }
    std::size_t n_users() const noexcept { return n_users_; }
    std::size_t n_sites() const noexcept { return n_sites_; }

    double direct(std::size_t draw, std::size_t k) const { return direct_[draw * n_users_ + k]; }
    double cascade(std::size_t draw, std::size_t site, std::size_t k) const {
        return cascade_[(draw * n_sites_ + site) * n_users_ + k];
    }

    /// Monte-Carlo estimate of sum_k E[gamma_k] for the selected sites.
    double sum_snr(std::span<const std::size_t> sites) const;
    /// Monte-Carlo estimate of (1/K) sum_k Pr[gamma_k >= gamma_th].
    double coverage(std::span<const std::size_t> sites) const;
    /// Same as coverage() with an overriding threshold.
    double coverage(std::span<const std::size_t> sites, double gamma_th) const;

private:
    std::size_t n_draws_;
    std::size_t n_users_;
    std::size_t n_sites_;
    double snr_scale_;  // P / sigma^2
    double gamma_th_;
    std::vector<double> direct_;
    std::vector<double> cascade_;
};

/// Throws ArgumentError for n_mc == 0.
double coverage_probability(const Scenario& scenario, const DeploymentPlan& plan,
                            const RadioParams& params, std::size_t n_mc, std::uint64_t seed);

/// Sum over users of the expected SNR. Two plans estimated with the same seed
/// share every fading draw.
double expected_sum_snr(const Scenario& scenario, const DeploymentPlan& plan,
                        const RadioParams& params, std::size_t n_mc, std::uint64_t seed);

}  // namespace risdiff
