// SPDX-License-Identifier: Apache-2.0
//
// mimo-elm: massive MIMO uplink receivers built as extreme learning machines
// Copyright (C) 2026 The mimo-elm Authors
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

// Sum-of-rays uplink channel for a half-wavelength uniform linear array.
// Spatial correlation comes from Laplacian-distributed ray angles around a
// per-user mean angle of arrival; temporal correlation from a per-ray
// Doppler shift f_d cos(psi).

#pragma once

#include "mimo_elm/numeric.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace mimo_elm {

inline constexpr double kSpeedOfLight = 299792458.0;

struct ChannelConfig {
    int n_antennas = 64;
    int n_users = 10;
    double carrier_hz = 2.0e9;
    double symbol_duration_s = 1.0e-6;
    double angular_spread_deg = 10.0;
    int n_rays = 5;
    double velocity_mps = 0.0;
    std::pair<double, double> mean_aoa_range_rad{-std::numbers::pi / 2, std::numbers::pi / 2};

    double max_doppler_hz() const { return velocity_mps * carrier_hz / kSpeedOfLight; }
    double angular_spread_rad() const { return angular_spread_deg * std::numbers::pi / 180.0; }

    void validate() const {
        if (n_users < 1) throw Error("channel.n_users must be >= 1");
        if (n_antennas < n_users) throw Error("channel.n_antennas must be >= channel.n_users");
        if (!(symbol_duration_s > 0.0)) throw Error("channel.symbol_duration_s must be > 0");
        if (n_rays < 1) throw Error("channel.n_rays must be >= 1");
        if (!(angular_spread_deg > 0.0)) throw Error("channel.angular_spread_deg must be > 0");
        if (!(velocity_mps >= 0.0)) throw Error("channel.velocity_mps must be >= 0");
        if (!(carrier_hz > 0.0)) throw Error("channel.carrier_hz must be > 0");
        if (!(mean_aoa_range_rad.first <= mean_aoa_range_rad.second))
            throw Error("channel.mean_aoa_range_rad must be an ordered interval");
    }
};

// Entry n is exp(-j pi n sin(theta)).
inline ComplexVector steering_vector(double theta, int n_antennas) {
    if (n_antennas < 1) throw Error("steering_vector: N must be >= 1");
    ComplexVector a(n_antennas);
    const double phase_step = -std::numbers::pi * std::sin(theta);
    for (int n = 0; n < n_antennas; ++n) a[n] = std::polar(1.0, phase_step * n);
    return a;
}

// Laplacian with the given scale, rejected outside [-limit, limit].
template <typename Rng>
double truncated_laplacian(Rng& rng, double scale, double limit = std::numbers::pi / 2) {
    std::exponential_distribution<double> magnitude(1.0 / scale);
    std::bernoulli_distribution negative(0.5);
    for (;;) {
        const double d = magnitude(rng);
        if (d <= limit) return negative(rng) ? -d : d;
    }
}

struct Ray {
    double aoa_rad = 0.0;
    cplx gain{1.0, 0.0};
    double doppler_hz = 0.0;
    double phase0 = 0.0;
};

class ChannelProcess {
  public:
    ChannelProcess() = default;

    ChannelProcess(int n_antennas, double symbol_duration_s, std::vector<double> mean_aoa,
                   std::vector<std::vector<Ray>> rays)
        : n_antennas_(n_antennas), symbol_duration_s_(symbol_duration_s), mean_aoa_(std::move(mean_aoa)),
          rays_(std::move(rays)) {
        std::size_t total = 0;
        for (const auto& user : rays_) total += user.size();
        steering_.resize(n_antennas_, static_cast<Eigen::Index>(total));
        Eigen::Index col = 0;
        for (const auto& user : rays_)
            for (const auto& ray : user) steering_.col(col++) = steering_vector(ray.aoa_rad, n_antennas_);
    }

    int n_antennas() const { return n_antennas_; }
    int n_users() const { return static_cast<int>(rays_.size()); }
    double symbol_duration_s() const { return symbol_duration_s_; }
    const std::vector<double>& mean_aoa() const { return mean_aoa_; }
    const std::vector<Ray>& rays(int user) const { return rays_.at(static_cast<std::size_t>(user)); }

    // H(m): column k = sum_r g exp(j(phi + 2 pi f m Ts)) a(theta).
    ComplexMatrix realize(std::int64_t m) const {
        if (m < 0) throw Error("realize: symbol index must be >= 0");
        const double t = static_cast<double>(m) * symbol_duration_s_;
        ComplexMatrix H = ComplexMatrix::Zero(n_antennas_, n_users());
        Eigen::Index col = 0;
        for (int k = 0; k < n_users(); ++k) {
            for (const auto& ray : rays_[static_cast<std::size_t>(k)]) {
                const double phase = ray.phase0 + 2.0 * std::numbers::pi * ray.doppler_hz * t;
                H.col(k) += (ray.gain * std::polar(1.0, phase)) * steering_.col(col++);
            }
        }
        return H;
    }

    bool operator==(const ChannelProcess& o) const {
        if (n_antennas_ != o.n_antennas_ || symbol_duration_s_ != o.symbol_duration_s_ || mean_aoa_ != o.mean_aoa_ ||
            rays_.size() != o.rays_.size())
            return false;
        for (std::size_t k = 0; k < rays_.size(); ++k) {
            if (rays_[k].size() != o.rays_[k].size()) return false;
            for (std::size_t r = 0; r < rays_[k].size(); ++r) {
                const auto& a = rays_[k][r];
                const auto& b = o.rays_[k][r];
                if (a.aoa_rad != b.aoa_rad || a.gain != b.gain || a.doppler_hz != b.doppler_hz || a.phase0 != b.phase0)
                    return false;
            }
        }
        return true;
    }

  private:
    int n_antennas_ = 0;
    double symbol_duration_s_ = 1.0;
    std::vector<double> mean_aoa_;
    std::vector<std::vector<Ray>> rays_;
    ComplexMatrix steering_; // one column per (user, ray), user-major
};

inline ChannelProcess draw_process(const ChannelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mean_aoa(cfg.mean_aoa_range_rad.first, cfg.mean_aoa_range_rad.second);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double laplace_scale = cfg.angular_spread_rad() / std::numbers::sqrt2;
    const double fd = cfg.max_doppler_hz();
    const double amp = 1.0 / std::sqrt(static_cast<double>(cfg.n_rays));

    std::vector<double> means;
    std::vector<std::vector<Ray>> rays;
    for (int k = 0; k < cfg.n_users; ++k) {
        const double center = mean_aoa(rng);
        means.push_back(center);
        std::vector<Ray> user;
        for (int r = 0; r < cfg.n_rays; ++r) {
            Ray ray;
            ray.aoa_rad = center + truncated_laplacian(rng, laplace_scale);
            ray.gain = std::polar(amp, phase(rng));
            ray.doppler_hz = fd * std::cos(phase(rng));
            ray.phase0 = phase(rng);
            user.push_back(ray);
        }
        rays.push_back(std::move(user));
    }
    return ChannelProcess(cfg.n_antennas, cfg.symbol_duration_s, std::move(means), std::move(rays));
}

inline ComplexMatrix realize(const ChannelProcess& proc, std::int64_t m) { return proc.realize(m); }

} // namespace mimo_elm
