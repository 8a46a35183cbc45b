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

// Transmit chain and impaired receive front end: Gray 16-QAM, Saleh power
// amplifier, AWGN, pre-ADC bias injection and a clipping mid-rise ADC.

#pragma once

#include "mimo_elm/numeric.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mimo_elm {

// Unit-power Gray-labelled 16-QAM. Label bits (b3 b2 b1 b0): b3 b2 pick the
// in-phase level, b1 b0 the quadrature level, each through the Gray table
// 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 (scaled by 1/sqrt(10)).
class QamConstellation {
  public:
    static constexpr int kOrder = 16;
    static constexpr int kBitsPerSymbol = 4;

    QamConstellation() {
        for (int label = 0; label < kOrder; ++label)
            points_[label] = cplx(gray_level(label >> 2), gray_level(label & 3)) * scale();
    }

    static double scale() { return 1.0 / std::sqrt(10.0); }
    static double min_distance() { return 2.0 * scale(); }

    const std::array<cplx, kOrder>& points() const { return points_; }
    cplx point(int label) const { return points_.at(static_cast<std::size_t>(label)); }

    // argmin_c |x - c|^2; ties go to the smallest label.
    int demap(cplx x) const {
        int best = 0;
        double best_d = std::norm(x - points_[0]);
        for (int label = 1; label < kOrder; ++label) {
            const double d = std::norm(x - points_[label]);
            if (d < best_d) {
                best_d = d;
                best = label;
            }
        }
        return best;
    }

    ComplexVector modulate(std::span<const std::uint8_t> bits) const {
        if (bits.size() % kBitsPerSymbol != 0) throw Error("modulate: bit count must be a multiple of 4");
        ComplexVector out(static_cast<Eigen::Index>(bits.size() / kBitsPerSymbol));
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            int label = 0;
            for (int b = 0; b < kBitsPerSymbol; ++b) {
                const auto bit = bits[static_cast<std::size_t>(i * kBitsPerSymbol + b)];
                if (bit > 1) throw Error("modulate: bits must be 0 or 1");
                label = (label << 1) | bit;
            }
            out[i] = points_[label];
        }
        return out;
    }

  private:
    static double gray_level(int two_bits) {
        static constexpr std::array<double, 4> table{-3.0, -1.0, 3.0, 1.0}; // index = bits: 00 01 10 11
        return table[static_cast<std::size_t>(two_bits)];
    }

    std::array<cplx, kOrder> points_{};
};

struct SalehParams {
    double alpha_a = 1.96;
    double eps_a = 0.99;
    double alpha_phi = 2.53;
    double eps_phi = 2.82;

    double amplitude(double r) const { return alpha_a * r / (1.0 + eps_a * r * r); }
    double phase(double r) const { return alpha_phi * r * r / (1.0 + eps_phi * r * r); }

    double peak_input() const { return 1.0 / std::sqrt(eps_a); }
    double peak_amplitude() const { return alpha_a / (2.0 * std::sqrt(eps_a)); }

    void validate() const {
        if (!(eps_a > 0.0) || !(eps_phi > 0.0)) throw Error("saleh: eps_a and eps_phi must be > 0");
    }
};

inline cplx pa_distort(cplx x, const SalehParams& p) {
    const double r = std::abs(x);
    if (r == 0.0) return {0.0, 0.0};
    return std::polar(p.amplitude(r), std::arg(x) + p.phase(r));
}

// Power amplifier stage; an empty model is the identity.
struct PaModel {
    bool bypass = false;
    SalehParams saleh{};

    cplx operator()(cplx x) const { return bypass ? x : pa_distort(x, saleh); }

    ComplexVector apply(const ComplexVector& x) const {
        ComplexVector s(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) s[i] = (*this)(x[i]);
        return s;
    }

    // Mean |f(c)|^2 over the constellation, the per-user transmit power under
    // uniform symbols.
    double mean_output_power(const QamConstellation& q) const {
        double acc = 0.0;
        for (const auto& c : q.points()) acc += std::norm((*this)(c));
        return acc / QamConstellation::kOrder;
    }
};

// Circular complex Gaussian samples with total variance sigma2.
template <typename Rng>
void add_awgn(ComplexVector& y, double sigma2, Rng& rng) {
    if (sigma2 <= 0.0) return;
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));
    for (Eigen::Index n = 0; n < y.size(); ++n) y[n] += cplx(g(rng), g(rng));
}

// y = H f(x) + n.
template <typename Rng>
ComplexVector transmit(const ComplexMatrix& H, const ComplexVector& x, double sigma2, Rng& rng,
                       const PaModel& pa = PaModel{}) {
    detail::require_dims(H.cols() == x.size(), "transmit: H columns must match the user count");
    ComplexVector y = H * pa.apply(x);
    add_awgn(y, sigma2, rng);
    return y;
}

// Clipping mid-rise ADC. Levels are step * (l + 0.5) for
// l in [-2^(b-1), 2^(b-1) - 1] with step = 2 * full_scale / 2^b.
// The per-branch bias vectors are frozen for the life of a receiver.
struct AdcConfig {
    bool ideal = false; // pass-through, infinite resolution
    int bits = 6;
    double step = 1.0;
    double full_scale = 1.0;
    RealVector bias_re;
    RealVector bias_im;

    static AdcConfig make(int bits, double full_scale) {
        if (bits < 1 || bits > 30) throw Error("adc: bits must lie in [1, 30]");
        if (!(full_scale > 0.0) || !std::isfinite(full_scale)) throw Error("adc: full scale must be > 0");
        AdcConfig a;
        a.bits = bits;
        a.full_scale = full_scale;
        a.step = 2.0 * full_scale / std::ldexp(1.0, bits);
        return a;
    }

    static AdcConfig passthrough() {
        AdcConfig a;
        a.ideal = true;
        return a;
    }

    std::int64_t min_level_index() const { return -(std::int64_t{1} << (bits - 1)); }
    std::int64_t max_level_index() const { return (std::int64_t{1} << (bits - 1)) - 1; }
    double level(std::int64_t l) const { return step * (static_cast<double>(l) + 0.5); }

    bool has_bias() const { return bias_re.size() > 0 || bias_im.size() > 0; }

    AdcConfig without_bias() const {
        AdcConfig a = *this;
        a.bias_re.resize(0);
        a.bias_im.resize(0);
        return a;
    }

    // Fixed i.i.d. uniform biases on [-scale, scale] for both branches of n
    // antennas.
    template <typename Rng>
    AdcConfig with_random_bias(int n_antennas, double scale, Rng& rng) const {
        AdcConfig a = *this;
        a.bias_re.resize(n_antennas);
        a.bias_im.resize(n_antennas);
        std::uniform_real_distribution<double> u(-scale, scale);
        for (int n = 0; n < n_antennas; ++n) a.bias_re[n] = u(rng);
        for (int n = 0; n < n_antennas; ++n) a.bias_im[n] = u(rng);
        return a;
    }
};

inline double quantize(double c, const AdcConfig& adc) {
    if (adc.ideal) return c;
    auto l = static_cast<std::int64_t>(std::floor(c / adc.step));
    if (l < adc.min_level_index()) l = adc.min_level_index();
    if (l > adc.max_level_index()) l = adc.max_level_index();
    return adc.level(l);
}

// Q([Re y; Im y] + [b_re; b_im]), the hidden-layer output of the natural ELM.
// An AdcConfig without biases quantizes the plain received signal.
inline RealVector bias_quantize(const ComplexVector& y, const AdcConfig& adc) {
    const auto n = y.size();
    const bool biased = adc.has_bias();
    if (biased)
        detail::require_dims(adc.bias_re.size() == n && adc.bias_im.size() == n,
                             "bias_quantize: bias length must match the antenna count");
    RealVector out(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = y[i].real() + (biased ? adc.bias_re[i] : 0.0);
        const double im = y[i].imag() + (biased ? adc.bias_im[i] : 0.0);
        out[i] = quantize(re, adc);
        out[n + i] = quantize(im, adc);
    }
    return out;
}

inline constexpr double kDefaultHeadroom = 3.0;

// Full scale = headroom * RMS(samples); biases are not drawn here.
inline AdcConfig calibrate_adc(std::span<const double> samples, int bits, double headroom = kDefaultHeadroom) {
    if (samples.size() < 100) throw Error("calibrate_adc: need at least 100 samples");
    if (!(headroom > 0.0)) throw Error("calibrate_adc: headroom must be > 0");
    double acc = 0.0;
    for (double s : samples) acc += s * s;
    const double rms = std::sqrt(acc / static_cast<double>(samples.size()));
    if (!(rms > 0.0)) throw Error("calibrate_adc: all-zero calibration samples");
    return AdcConfig::make(bits, headroom * rms);
}

} // namespace mimo_elm
