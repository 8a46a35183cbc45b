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

// Seeded Monte Carlo experiments: SER-vs-SNR sweep on a quasi-static
// channel, the biasing/quantization ablation, and adaptive tracking on a
// time-varying channel.
//
// Every random quantity of trial t is drawn from its own stream seeded by
// derive_seed(master_seed, {t, ...}), so records are independent of the
// number of worker threads and of the order trials complete in.

#pragma once

#include "mimo_elm/channel.hpp"
#include "mimo_elm/frontend.hpp"
#include "mimo_elm/harness/config.hpp"
#include "mimo_elm/harness/records.hpp"
#include "mimo_elm/receivers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace mimo_elm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(master);
    for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

using Rng = std::mt19937_64;

namespace sim {

enum Stream : std::uint64_t {
    kChannel = 1,
    kCalibration,
    kBias,
    kTraining,
    kPayload,
    kHiddenLayer,
    kInit,
    kFrameTraining,
    kFrameData,
    kBenchmark,
};

// count x K transmitted symbols and the matching count x N received samples.
struct Block {
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> labels;
    ComplexMatrix X;
    ComplexMatrix Y;

    Eigen::Index size() const { return X.rows(); }
};

inline void draw_symbols(Block& b, Eigen::Index count, int n_users, const QamConstellation& q, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, QamConstellation::kOrder - 1);
    b.labels.resize(count, n_users);
    b.X.resize(count, n_users);
    for (Eigen::Index m = 0; m < count; ++m)
        for (int k = 0; k < n_users; ++k) {
            b.labels(m, k) = pick(rng);
            b.X(m, k) = q.point(b.labels(m, k));
        }
}

inline void add_noise(ComplexMatrix& Y, double sigma2, Rng& rng) {
    if (sigma2 <= 0.0) return;
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));
    for (Eigen::Index m = 0; m < Y.rows(); ++m)
        for (Eigen::Index n = 0; n < Y.cols(); ++n) Y(m, n) += cplx(g(rng), g(rng));
}

inline ComplexMatrix apply_pa(const ComplexMatrix& X, const PaModel& pa) {
    return X.unaryExpr([&](const cplx& x) { return pa(x); });
}

// Rows are y(m)^T = (H f(x(m)) + n(m))^T for a fixed H.
inline Block static_block(const ComplexMatrix& H, Eigen::Index count, double sigma2, const PaModel& pa,
                          const QamConstellation& q, Rng& rng) {
    Block b;
    draw_symbols(b, count, static_cast<int>(H.cols()), q, rng);
    b.Y = apply_pa(b.X, pa) * H.transpose();
    add_noise(b.Y, sigma2, rng);
    return b;
}

// Same, with H(m) evolving: row i is received at symbol index t0 + i.
inline Block varying_block(const ChannelProcess& proc, std::int64_t t0, Eigen::Index count, double sigma2,
                           const PaModel& pa, const QamConstellation& q, Rng& rng) {
    Block b;
    draw_symbols(b, count, proc.n_users(), q, rng);
    const ComplexMatrix S = apply_pa(b.X, pa);
    b.Y.resize(count, proc.n_antennas());
    for (Eigen::Index i = 0; i < count; ++i) b.Y.row(i) = (proc.realize(t0 + i) * S.row(i).transpose()).transpose();
    add_noise(b.Y, sigma2, rng);
    return b;
}

// Rows: bias_quantize of each received vector.
inline RealMatrix observe(const ComplexMatrix& Y, const AdcConfig& adc) {
    RealMatrix R(Y.rows(), 2 * Y.cols());
    for (Eigen::Index m = 0; m < Y.rows(); ++m) R.row(m) = bias_quantize(Y.row(m).transpose(), adc).transpose();
    return R;
}

// Per-user symbol error counts of hard decisions on soft estimates.
inline std::vector<std::int64_t> count_errors(const ComplexMatrix& soft,
                                              const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& labels,
                                              const QamConstellation& q) {
    std::vector<std::int64_t> errs(static_cast<std::size_t>(soft.cols()), 0);
    for (Eigen::Index m = 0; m < soft.rows(); ++m)
        for (Eigen::Index k = 0; k < soft.cols(); ++k)
            if (q.demap(soft(m, k)) != labels(m, k)) ++errs[static_cast<std::size_t>(k)];
    return errs;
}

inline double noise_variance(const ExperimentConfig& cfg, const QamConstellation& q, double snr_db) {
    const double ps = cfg.power_reference == PowerReference::PostPa ? cfg.pa().mean_output_power(q) : 1.0;
    return ps / std::pow(10.0, snr_db / 10.0);
}

// Calibrated ADC for the given channel and noise level; passthrough when the
// configuration asks for an ideal converter.
inline AdcConfig calibrated_adc(const ExperimentConfig& cfg, const ComplexMatrix& H, double sigma2,
                                const QamConstellation& q, Rng& rng) {
    if (cfg.adc.ideal) return AdcConfig::passthrough();
    const Block pre = static_block(H, cfg.adc.calibration_len, sigma2, cfg.pa(), q, rng);
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(pre.Y.size() * 2));
    for (Eigen::Index m = 0; m < pre.Y.rows(); ++m)
        for (Eigen::Index n = 0; n < pre.Y.cols(); ++n) {
            samples.push_back(pre.Y(m, n).real());
            samples.push_back(pre.Y(m, n).imag());
        }
    return calibrate_adc(samples, cfg.adc.bits, cfg.adc.headroom);
}

inline constexpr Eigen::Index kPayloadBlock = 4096;

} // namespace sim

// Runs fn(trial) for every trial on up to `parallel` threads and sums the
// tallies.
template <typename Fn>
Tally run_trials(int trials, int parallel, Fn&& fn) {
    const int workers = std::max(1, std::min(parallel, trials));
    std::vector<Tally> per_trial(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (int t = next++; t < trials; t = next++) {
            try {
                per_trial[static_cast<std::size_t>(t)] = fn(t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    Tally total;
    for (const auto& t : per_trial) total += t;
    return total;
}

inline std::vector<SerRecord> to_records(const Tally& tally, const std::string& experiment,
                                         const std::vector<double>& snr_db, const std::vector<std::string>& slot_names,
                                         std::uint64_t seed) {
    std::vector<SerRecord> out;
    for (const auto& [key, count] : tally.counts()) {
        const auto [snr_index, frame, slot] = key;
        SerRecord r;
        r.experiment = experiment;
        r.receiver = slot_names.at(static_cast<std::size_t>(slot));
        r.snr_db = snr_db.at(static_cast<std::size_t>(snr_index));
        r.frame = frame;
        r.symbols = count.symbols;
        r.errors = count.errors;
        r.ser = count.symbols > 0 ? static_cast<double>(count.errors) / static_cast<double>(count.symbols) : 0.0;
        r.seed = seed;
        out.push_back(std::move(r));
    }
    return out;
}

namespace detail {

// Pooled slot per receiver, then optional per-user slots named "<receiver>#k".
inline std::vector<std::string> slot_names(const std::vector<std::string>& receivers, int n_users, bool per_user) {
    std::vector<std::string> names = receivers;
    if (per_user)
        for (const auto& r : receivers)
            for (int k = 0; k < n_users; ++k) names.push_back(r + "#" + std::to_string(k));
    return names;
}

inline void tally_errors(Tally& tally, int snr_index, int frame, int slot, int n_slots, bool per_user,
                         const std::vector<std::int64_t>& errs, std::int64_t vectors) {
    std::int64_t total = 0;
    for (auto e : errs) total += e;
    tally.add(snr_index, frame, slot, vectors * static_cast<std::int64_t>(errs.size()), total);
    if (per_user)
        for (std::size_t k = 0; k < errs.size(); ++k)
            tally.add(snr_index, frame, n_slots + slot * static_cast<int>(errs.size()) + static_cast<int>(k), vectors,
                      errs[k]);
}

} // namespace detail

// Quasi-static SER sweep over every configured receiver.
inline Tally ser_sweep_trial(const ExperimentConfig& cfg, int trial) {
    using namespace sim;
    const QamConstellation q;
    const PaModel pa = cfg.pa();
    const std::uint64_t ms = cfg.master_seed;
    const auto t = static_cast<std::uint64_t>(trial);
    const int n_slots = static_cast<int>(cfg.receivers.size());
    const int N = cfg.channel.n_antennas;

    ChannelConfig static_channel = cfg.channel;
    static_channel.velocity_mps = 0.0;
    const ComplexMatrix H = draw_process(static_channel, derive_seed(ms, {t, kChannel})).realize(0);

    Tally tally;
    for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
        const double snr_db = cfg.snr_db_list[si];
        const double sigma2 = noise_variance(cfg, q, snr_db);
        Rng cal_rng(derive_seed(ms, {t, si, kCalibration}));
        Rng bias_rng(derive_seed(ms, {t, si, kBias}));
        Rng train_rng(derive_seed(ms, {t, si, kTraining}));
        Rng payload_rng(derive_seed(ms, {t, si, kPayload}));
        Rng hidden_rng(derive_seed(ms, {t, si, kHiddenLayer}));

        const AdcConfig adc = calibrated_adc(cfg, H, sigma2, q, cal_rng);
        const AdcConfig adc_biased = adc.with_random_bias(N, cfg.adc.bias_scale, bias_rng);

        const Block train = static_block(H, cfg.training_len, sigma2, pa, q, train_rng);
        const RealMatrix R_plain = observe(train.Y, adc);
        const RealMatrix R_biased = observe(train.Y, adc_biased);

        std::optional<ElmReceiverWeights> natural, trained;
        std::optional<BorrowedElmModel> borrowed;
        std::optional<LinearCombinerWeights> zf, mmse;
        if (cfg.runs(ReceiverKind::NaturalElm)) natural = train_natural_elm(R_biased, train.X, cfg.gamma.natural_elm);
        if (cfg.runs(ReceiverKind::TrainedZf)) trained = train_zf_direct(R_plain, train.X, cfg.gamma.trained_zf);
        if (cfg.runs(ReceiverKind::BorrowedElm))
            borrowed = train_borrowed_elm(R_plain, train.X, cfg.gamma.borrowed_elm, cfg.borrowed.hidden, hidden_rng,
                                          cfg.borrowed.weight_range);
        if (cfg.runs(ReceiverKind::Zf)) zf = zf_weights(H);
        if (cfg.runs(ReceiverKind::Mmse)) mmse = mmse_weights(H, std::pow(10.0, snr_db / 10.0));

        for (Eigen::Index done = 0; done < cfg.payload_len; done += kPayloadBlock) {
            const Eigen::Index count = std::min<Eigen::Index>(kPayloadBlock, cfg.payload_len - done);
            const Block pay = static_block(H, count, sigma2, pa, q, payload_rng);
            const RealMatrix P_plain = observe(pay.Y, adc);
            const RealMatrix P_biased = natural ? observe(pay.Y, adc_biased) : RealMatrix{};
            for (int slot = 0; slot < n_slots; ++slot) {
                ComplexMatrix soft;
                switch (cfg.receivers[static_cast<std::size_t>(slot)]) {
                case ReceiverKind::NaturalElm: soft = natural->equalize_batch(P_biased); break;
                case ReceiverKind::BorrowedElm: soft = borrowed->equalize_batch(P_plain); break;
                case ReceiverKind::TrainedZf: soft = trained->equalize_batch(P_plain); break;
                case ReceiverKind::Zf: soft = zf->equalize_batch(P_plain); break;
                case ReceiverKind::Mmse: soft = mmse->equalize_batch(P_plain); break;
                }
                detail::tally_errors(tally, static_cast<int>(si), -1, slot, n_slots, cfg.per_user,
                                     count_errors(soft, pay.labels, q), count);
            }
        }
    }
    return tally;
}

inline std::vector<SerRecord> run_ser_sweep(const ExperimentConfig& cfg, int parallel = 1) {
    cfg.validate();
    std::vector<std::string> names;
    for (auto r : cfg.receivers) names.emplace_back(receiver_name(r));
    const Tally tally = run_trials(cfg.trials, parallel, [&](int t) { return ser_sweep_trial(cfg, t); });
    return to_records(tally, "ser_sweep", cfg.snr_db_list,
                      detail::slot_names(names, cfg.channel.n_users, cfg.per_user), cfg.master_seed);
}

inline const std::vector<std::string>& ablation_receivers() {
    static const std::vector<std::string> names{"trained_zf_unquantized", "trained_zf_unquantized_biased",
                                                "trained_zf", "natural_elm"};
    return names;
}

// Trained ZF with and without quantization and biasing, against the natural
// ELM (quantized and biased). All four share training data and biases.
inline Tally bias_ablation_trial(const ExperimentConfig& cfg, int trial) {
    using namespace sim;
    const QamConstellation q;
    const PaModel pa = cfg.pa();
    const std::uint64_t ms = cfg.master_seed;
    const auto t = static_cast<std::uint64_t>(trial);
    const int N = cfg.channel.n_antennas;
    const int n_slots = static_cast<int>(ablation_receivers().size());

    ChannelConfig static_channel = cfg.channel;
    static_channel.velocity_mps = 0.0;
    const ComplexMatrix H = draw_process(static_channel, derive_seed(ms, {t, kChannel})).realize(0);

    Tally tally;
    for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
        const double sigma2 = noise_variance(cfg, q, cfg.snr_db_list[si]);
        Rng cal_rng(derive_seed(ms, {t, si, kCalibration}));
        Rng bias_rng(derive_seed(ms, {t, si, kBias}));
        Rng train_rng(derive_seed(ms, {t, si, kTraining}));
        Rng payload_rng(derive_seed(ms, {t, si, kPayload}));

        const AdcConfig quantized = calibrated_adc(cfg, H, sigma2, q, cal_rng);
        const AdcConfig biased = quantized.with_random_bias(N, cfg.adc.bias_scale, bias_rng);
        AdcConfig unquantized = AdcConfig::passthrough();
        AdcConfig unquantized_biased = unquantized;
        unquantized_biased.bias_re = biased.bias_re;
        unquantized_biased.bias_im = biased.bias_im;

        const std::vector<const AdcConfig*> fronts{&unquantized, &unquantized_biased, &quantized, &biased};
        const std::vector<double> gammas{cfg.gamma.trained_zf, cfg.gamma.trained_zf, cfg.gamma.trained_zf,
                                         cfg.gamma.natural_elm};

        const Block train = static_block(H, cfg.training_len, sigma2, pa, q, train_rng);
        std::vector<ElmReceiverWeights> weights;
        for (std::size_t i = 0; i < fronts.size(); ++i)
            weights.push_back(train_natural_elm(observe(train.Y, *fronts[i]), train.X, gammas[i]));

        for (Eigen::Index done = 0; done < cfg.payload_len; done += kPayloadBlock) {
            const Eigen::Index count = std::min<Eigen::Index>(kPayloadBlock, cfg.payload_len - done);
            const Block pay = static_block(H, count, sigma2, pa, q, payload_rng);
            for (int slot = 0; slot < n_slots; ++slot) {
                const auto s = static_cast<std::size_t>(slot);
                const ComplexMatrix soft = weights[s].equalize_batch(observe(pay.Y, *fronts[s]));
                detail::tally_errors(tally, static_cast<int>(si), -1, slot, n_slots, cfg.per_user,
                                     count_errors(soft, pay.labels, q), count);
            }
        }
    }
    return tally;
}

inline std::vector<SerRecord> run_bias_ablation(const ExperimentConfig& cfg, int parallel = 1) {
    cfg.validate();
    const Tally tally = run_trials(cfg.trials, parallel, [&](int t) { return bias_ablation_trial(cfg, t); });
    return to_records(tally, "bias_ablation", cfg.snr_db_list,
                      detail::slot_names(ablation_receivers(), cfg.channel.n_users, cfg.per_user), cfg.master_seed);
}

inline const std::vector<std::string>& adaptive_receivers() {
    static const std::vector<std::string> names{"oselm", "retrained", "frozen"};
    return names;
}

// Symbol-index layout of the adaptive experiment.
struct FrameLayout {
    std::int64_t init_len;
    std::int64_t training_len;
    std::int64_t data_len;

    std::int64_t frame_start(int f) const { return init_len + f * (training_len + data_len); }
    std::int64_t data_start(int f) const { return frame_start(f) + training_len; }
};

// Time-varying channel. Three natural-ELM receivers share the biased ADC:
//   oselm      initialized on init_len symbols, then RLS-updated with each
//              frame's training segment;
//   retrained  batch-trained per frame on benchmark_training_len fresh
//              symbols received immediately before that frame's payload;
//   frozen     the initial batch solution, never updated.
inline Tally adaptive_trial(const ExperimentConfig& cfg, int trial) {
    using namespace sim;
    const QamConstellation q;
    const PaModel pa = cfg.pa();
    const std::uint64_t ms = cfg.master_seed;
    const auto t = static_cast<std::uint64_t>(trial);
    const int N = cfg.channel.n_antennas;
    const int n_slots = static_cast<int>(adaptive_receivers().size());
    const auto& ad = cfg.adaptive;
    const FrameLayout layout{ad.init_len, ad.frame_training_len, ad.frame_data_len};

    const ChannelProcess proc = draw_process(cfg.channel, derive_seed(ms, {t, kChannel}));

    Tally tally;
    for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
        const double sigma2 = noise_variance(cfg, q, cfg.snr_db_list[si]);
        Rng cal_rng(derive_seed(ms, {t, si, kCalibration}));
        Rng bias_rng(derive_seed(ms, {t, si, kBias}));
        Rng init_rng(derive_seed(ms, {t, si, kInit}));

        const AdcConfig adc = calibrated_adc(cfg, proc.realize(0), sigma2, q, cal_rng);
        const AdcConfig biased = adc.with_random_bias(N, cfg.adc.bias_scale, bias_rng);

        const Block init = varying_block(proc, 0, ad.init_len, sigma2, pa, q, init_rng);
        const RealMatrix R0 = observe(init.Y, biased);
        AdaptiveElmReceiver oselm = oselm_init(R0, init.X, cfg.gamma.oselm, ad.lambda);
        const ElmReceiverWeights frozen = train_natural_elm(R0, init.X, cfg.gamma.natural_elm);

        for (int f = 0; f < ad.n_frames; ++f) {
            const auto fu = static_cast<std::uint64_t>(f);
            Rng frame_rng(derive_seed(ms, {t, si, fu, kFrameTraining}));
            Rng data_rng(derive_seed(ms, {t, si, fu, kFrameData}));
            Rng bench_rng(derive_seed(ms, {t, si, fu, kBenchmark}));

            const Block upd = varying_block(proc, layout.frame_start(f), ad.frame_training_len, sigma2, pa, q,
                                            frame_rng);
            oselm_update_in_place(oselm, observe(upd.Y, biased), upd.X);

            const std::int64_t d0 = layout.data_start(f);
            const std::int64_t b0 = std::max<std::int64_t>(0, d0 - ad.benchmark_training_len);
            const Block bench = varying_block(proc, b0, d0 - b0, sigma2, pa, q, bench_rng);
            const ElmReceiverWeights retrained =
                train_natural_elm(observe(bench.Y, biased), bench.X, cfg.gamma.natural_elm);

            const Block data = varying_block(proc, d0, ad.frame_data_len, sigma2, pa, q, data_rng);
            const RealMatrix Rd = observe(data.Y, biased);
            const ElmReceiverWeights tracked = oselm.weights();
            const std::vector<const ElmReceiverWeights*> slots{&tracked, &retrained, &frozen};
            for (int slot = 0; slot < n_slots; ++slot) {
                const ComplexMatrix soft = slots[static_cast<std::size_t>(slot)]->equalize_batch(Rd);
                detail::tally_errors(tally, static_cast<int>(si), f, slot, n_slots, cfg.per_user,
                                     count_errors(soft, data.labels, q), data.size());
            }
        }
    }
    return tally;
}

inline std::vector<SerRecord> run_adaptive(const ExperimentConfig& cfg, int parallel = 1) {
    cfg.validate();
    const Tally tally = run_trials(cfg.trials, parallel, [&](int t) { return adaptive_trial(cfg, t); });
    return to_records(tally, "adaptive", cfg.snr_db_list,
                      detail::slot_names(adaptive_receivers(), cfg.channel.n_users, cfg.per_user), cfg.master_seed);
}

} // namespace mimo_elm
