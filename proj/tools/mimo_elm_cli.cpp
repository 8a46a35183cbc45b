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

// Command-line front end: ser-sweep, bias-ablation, adaptive, selftest.

#include "mimo_elm/mimo_elm.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace mimo_elm;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string preset_name = "desk";
    std::string receivers;
    int parallel = 1;
    std::optional<int> trials;
    bool dump_config = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON experiment config (applied on top of the preset)");
    cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
    cmd->add_option("--out", o.out_path, "CSV output path (default: stdout)");
    cmd->add_option("--preset", o.preset_name, "base preset")->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--receivers", o.receivers, "comma-separated receiver list (ser-sweep)");
    cmd->add_option("--parallel", o.parallel, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--trials", o.trials, "Monte Carlo trials (overrides the config)")->check(CLI::PositiveNumber);
    cmd->add_flag("--dump-config", o.dump_config, "print the effective config as JSON and exit");
}

ExperimentConfig resolve(const CommonOptions& o) {
    ExperimentConfig cfg = preset(o.preset_name);
    if (!o.config_path.empty()) cfg = load_config(o.config_path, cfg);
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    if (!o.receivers.empty()) {
        cfg.receivers.clear();
        std::stringstream ss(o.receivers);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) cfg.receivers.push_back(parse_receiver(item));
    }
    cfg.validate();
    return cfg;
}

void emit(const std::vector<SerRecord>& records, const std::string& path) {
    if (path.empty()) write_csv(records, std::cout);
    else write_csv(records, path);
}

int run_experiment(const CommonOptions& o,
                   const std::function<std::vector<SerRecord>(const ExperimentConfig&, int)>& fn) {
    const ExperimentConfig cfg = resolve(o);
    if (o.dump_config) {
        std::cout << to_json(cfg).dump(2) << '\n';
        return 0;
    }
    emit(fn(cfg, o.parallel), o.out_path);
    return 0;
}

// Quick internal consistency checks; exit status reports the outcome.
int selftest() {
    int failures = 0;
    auto check = [&](bool ok, const char* what) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what);
        if (!ok) ++failures;
    };

    Rng rng(7);
    std::normal_distribution<double> g;
    RealMatrix Z(30, 8), T(30, 2);
    for (auto* m : {&Z, &T})
        for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = g(rng);
    const RealMatrix B = ridge_solve(Z, T, 0.01);
    RealMatrix normal = Z.transpose() * Z;
    normal.diagonal().array() += 0.01;
    check((normal * B - Z.transpose() * T).norm() <= 1e-9 * (Z.transpose() * T).norm(),
          "ridge solution satisfies the normal equations");

    ComplexMatrix H(4, 3);
    ComplexVector s(3);
    for (Eigen::Index i = 0; i < H.size(); ++i) H.data()[i] = cplx(g(rng), g(rng));
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = cplx(g(rng), g(rng));
    check((real_stack(H * s) - real_composite(H) * real_stack(s)).norm() <= 1e-12, "real-composite identity");

    const SalehParams pa;
    check(std::abs(std::abs(pa_distort({1.0, 0.0}, pa)) - 1.96 / 1.99) <= 1e-12, "PA gain at unit input");

    const AdcConfig adc = AdcConfig::make(2, 1.0);
    check(quantize(5.0, adc) == 0.75 && quantize(0.1, adc) == 0.25, "ADC clipping and mid-rise levels");

    ExperimentConfig cfg = desk_preset();
    cfg.channel.n_antennas = 16;
    cfg.channel.n_users = 2;
    cfg.saleh.reset();
    cfg.adc.ideal = true;
    cfg.snr_db_list = {30.0};
    cfg.training_len = 200;
    cfg.payload_len = 500;
    cfg.receivers = {ReceiverKind::Zf, ReceiverKind::NaturalElm};
    const auto recs = run_ser_sweep(cfg);
    check(recs.size() == 2 && recs[0].ser < 0.01 && recs[1].ser < 0.01, "linear chain detects cleanly at 30 dB");

    std::printf("%s\n", failures == 0 ? "selftest passed" : "selftest FAILED");
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Massive MIMO receivers as extreme learning machines: SER experiments"};
    app.require_subcommand(1);

    CommonOptions sweep_opts, ablation_opts, adaptive_opts;
    auto* sweep = app.add_subcommand("ser-sweep", "SER vs SNR of every receiver on a quasi-static channel");
    add_common(sweep, sweep_opts);
    auto* ablation = app.add_subcommand("bias-ablation", "trained ZF with/without biasing and quantization vs ELM");
    add_common(ablation, ablation_opts);
    auto* adaptive = app.add_subcommand("adaptive", "per-frame SER of the adaptive receiver on a moving channel");
    add_common(adaptive, adaptive_opts);
    auto* self = app.add_subcommand("selftest", "run built-in consistency checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) return run_experiment(sweep_opts, [](const auto& c, int p) { return run_ser_sweep(c, p); });
        if (*ablation)
            return run_experiment(ablation_opts, [](const auto& c, int p) { return run_bias_ablation(c, p); });
        if (*adaptive) return run_experiment(adaptive_opts, [](const auto& c, int p) { return run_adaptive(c, p); });
        if (*self) return selftest();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
