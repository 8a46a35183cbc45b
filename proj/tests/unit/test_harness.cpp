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

#include <catch_amalgamated.hpp>

#include "mimo_elm/harness/config.hpp"
#include "mimo_elm/harness/experiments.hpp"
#include "mimo_elm/harness/records.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace mimo_elm;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c = desk_preset();
    c.channel.n_antennas = 16;
    c.channel.n_users = 3;
    c.training_len = 300;
    c.payload_len = 500;
    c.borrowed.hidden = 32;
    c.adc.calibration_len = 50;
    c.snr_db_list = {0.0, 10.0, 20.0, 30.0};
    return c;
}

std::string csv_of(const std::vector<SerRecord>& records) {
    std::ostringstream os;
    write_csv(records, os);
    return os.str();
}

const SerRecord& find(const std::vector<SerRecord>& rs, const std::string& receiver, double snr, int frame = -1) {
    for (const auto& r : rs)
        if (r.receiver == receiver && r.snr_db == snr && r.frame == frame) return r;
    FAIL("no record for " << receiver << " at " << snr << " dB, frame " << frame);
    throw;
}

double z_score(const SerRecord& a, const SerRecord& b) {
    const double se = std::hypot(a.std_error(), b.std_error());
    return se > 0.0 ? std::abs(a.ser - b.ser) / se : 0.0;
}

} // namespace

TEST_CASE("derive_seed - distinct paths give distinct streams")
{
    CHECK(derive_seed(1, {0, 1}) == derive_seed(1, {0, 1}));
    CHECK(derive_seed(1, {0, 1}) != derive_seed(1, {1, 0}));
    CHECK(derive_seed(1, {0}) != derive_seed(2, {0}));
    CHECK(derive_seed(1, {}) != derive_seed(1, {0}));
}

TEST_CASE("run_ser_sweep - cardinality and record arithmetic")
{
    const ExperimentConfig c = small_config();
    const auto rs = run_ser_sweep(c);
    REQUIRE(rs.size() == 20);
    std::map<std::string, int> per_receiver;
    for (const auto& r : rs) {
        ++per_receiver[r.receiver];
        CHECK(r.experiment == "ser_sweep");
        CHECK(r.frame == -1);
        CHECK(r.symbols == 500 * 3);
        CHECK(r.seed == c.master_seed);
        CHECK(r.ser >= 0.0);
        CHECK(r.ser <= 1.0);
        CHECK(static_cast<double>(r.errors) == std::round(r.ser * static_cast<double>(r.symbols)));
    }
    CHECK(per_receiver.size() == 5);
    for (const auto& [name, n] : per_receiver) CHECK(n == 4);
}

TEST_CASE("run_ser_sweep - per-user slots sum to the pooled count")
{
    ExperimentConfig c = small_config();
    c.snr_db_list = {10.0};
    c.receivers = {ReceiverKind::NaturalElm, ReceiverKind::Zf};
    c.per_user = true;
    const auto rs = run_ser_sweep(c);
    REQUIRE(rs.size() == 2 + 2 * 3);
    for (const char* name : {"natural_elm", "zf"}) {
        std::int64_t errs = 0, syms = 0;
        for (int k = 0; k < 3; ++k) {
            const auto& r = find(rs, std::string(name) + "#" + std::to_string(k), 10.0);
            errs += r.errors;
            syms += r.symbols;
        }
        CHECK(errs == find(rs, name, 10.0).errors);
        CHECK(syms == find(rs, name, 10.0).symbols);
    }
}

TEST_CASE("run_ser_sweep - deterministic across runs and thread counts")
{
    ExperimentConfig c = small_config();
    c.trials = 5;
    const std::string a = csv_of(run_ser_sweep(c, 1));
    const std::string b = csv_of(run_ser_sweep(c, 1));
    const std::string d = csv_of(run_ser_sweep(c, 3));
    CHECK(a == b);
    CHECK(a == d);
    c.master_seed = 2;
    CHECK(csv_of(run_ser_sweep(c, 2)) != a);
}

TEST_CASE("run_ser_sweep - ideal chain ZF is error free at 30 dB")
{
    ExperimentConfig c = desk_preset();
    c.channel.n_antennas = 64;
    c.channel.n_users = 8;
    c.saleh.reset();
    c.adc.ideal = true;
    c.snr_db_list = {30.0};
    c.receivers = {ReceiverKind::Zf};
    c.training_len = 100;
    c.payload_len = 125000; // 10^6 symbols
    const auto rs = run_ser_sweep(c);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].symbols == 1000000);
    CHECK(rs[0].ser < 1e-4);
}

TEST_CASE("run_ser_sweep - SER is non-increasing in SNR on a linear chain")
{
    // With the PA in compression the linear detectors err deterministically
    // and noise only dithers those errors, so the curve is checked PA-free.
    ExperimentConfig c = desk_preset();
    c.saleh.reset();
    c.snr_db_list = {-10.0, -5.0, 0.0, 5.0};
    c.payload_len = 10000;
    c.borrowed.hidden = 128;
    const auto rs = run_ser_sweep(c, 4);
    for (auto kind : c.receivers) {
        const std::string name(receiver_name(kind));
        int inversions = 0;
        for (std::size_t i = 1; i < c.snr_db_list.size(); ++i) {
            const auto& lo = find(rs, name, c.snr_db_list[i - 1]);
            const auto& hi = find(rs, name, c.snr_db_list[i]);
            if (hi.ser > lo.ser) ++inversions;
        }
        INFO(name);
        CHECK(inversions <= 1);
    }
}

TEST_CASE("run_ser_sweep - invalid config is rejected")
{
    ExperimentConfig c = small_config();
    c.snr_db_list.clear();
    CHECK_THROWS_AS(run_ser_sweep(c), ConfigError);
    c = small_config();
    c.training_len = 0;
    CHECK_THROWS_WITH(run_ser_sweep(c), Catch::Matchers::ContainsSubstring("training_len"));
}

TEST_CASE("run_bias_ablation - four systems per SNR")
{
    ExperimentConfig c = small_config();
    c.snr_db_list = {10.0, 30.0};
    const auto rs = run_bias_ablation(c);
    REQUIRE(rs.size() == 8);
    for (double snr : c.snr_db_list)
        for (const auto& name : ablation_receivers()) CHECK(find(rs, name, snr).experiment == "bias_ablation");
}

TEST_CASE("run_bias_ablation - bias is harmless on a linear unquantized chain")
{
    ExperimentConfig c = desk_preset();
    c.saleh.reset();
    c.snr_db_list = {5.0};
    c.payload_len = 20000;
    const auto rs = run_bias_ablation(c);
    const auto& plain = find(rs, "trained_zf_unquantized", 5.0);
    const auto& biased = find(rs, "trained_zf_unquantized_biased", 5.0);
    CHECK(plain.ser > 0.0);
    CHECK(z_score(plain, biased) <= 2.0);
}

TEST_CASE("run_adaptive - frames, flat SER on a static channel")
{
    ExperimentConfig c = desk_preset();
    c.channel.velocity_mps = 0.0;
    c.snr_db_list = {10.0};
    c.adaptive.n_frames = 10;
    const auto rs = run_adaptive(c);
    REQUIRE(rs.size() == 30);
    // Frame 0 still carries the decaying ridge term of the initialization;
    // from frame 1 on the forgetting window is in steady state.
    SerRecord early{}, late{};
    for (int f = 0; f < 10; ++f) {
        const auto& r = find(rs, "oselm", 10.0, f);
        CHECK(r.symbols == 1700 * 10);
        if (f == 0) continue;
        SerRecord& acc = f < 5 ? early : late;
        acc.symbols += r.symbols;
        acc.errors += r.errors;
    }
    early.ser = static_cast<double>(early.errors) / static_cast<double>(early.symbols);
    late.ser = static_cast<double>(late.errors) / static_cast<double>(late.symbols);
    CHECK(early.ser > 0.0);
    CHECK(z_score(early, late) <= 3.0);
}

TEST_CASE("oselm - lambda = 1 on a static channel approaches the batch solution")
{
    using namespace sim;
    const QamConstellation q;
    ExperimentConfig c = desk_preset();
    c.channel.velocity_mps = 0.0;
    const PaModel pa = c.pa();
    const double sigma2 = noise_variance(c, q, 10.0);
    const ChannelProcess proc = draw_process(c.channel, 11);
    Rng rng(12);
    const AdcConfig adc = calibrated_adc(c, proc.realize(0), sigma2, q, rng).with_random_bias(64, 0.1, rng);

    const Block big = varying_block(proc, 0, 40000, sigma2, pa, q, rng);
    const RealMatrix target = train_natural_elm(observe(big.Y, adc), big.X, 1.0).stacked();

    const Block init = varying_block(proc, 0, 3000, sigma2, pa, q, rng);
    AdaptiveElmReceiver a = oselm_init(observe(init.Y, adc), init.X, 1.0, 1.0);
    double prev = (a.rls.beta - target).norm();
    for (int f = 0; f < 10; ++f) {
        const Block upd = varying_block(proc, 3000 + 2000 * f, 2000, sigma2, pa, q, rng);
        oselm_update_in_place(a, observe(upd.Y, adc), upd.X);
        const double now = (a.rls.beta - target).norm();
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("write_csv - header and format")
{
    CHECK(csv_of({}) == "experiment,receiver,snr_db,frame,symbols,errors,ser,seed\n");
    SerRecord r{"adaptive", "oselm", 17.5, 3, 1000, 7, 0.007, 42};
    CHECK(csv_of({r}) ==
          "experiment,receiver,snr_db,frame,symbols,errors,ser,seed\nadaptive,oselm,17.5,3,1000,7,0.007,42\n");

    const auto path = std::filesystem::temp_directory_path() / "mimo_elm_empty.csv";
    write_csv({}, path.string());
    std::ifstream in(path, std::ios::binary);
    const std::string body((std::istreambuf_iterator<char>(in)), {});
    CHECK(body == std::string(kCsvHeader) + "\n");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_csv({}, std::string("/nonexistent-dir/x.csv")), Error);
}

TEST_CASE("config - JSON round trip")
{
    for (const char* name : {"desk", "paper"}) {
        const ExperimentConfig c = preset(name);
        const auto j = to_json(c);
        const auto path = std::filesystem::temp_directory_path() / "mimo_elm_cfg.json";
        std::ofstream(path) << j.dump(2);
        const ExperimentConfig back = load_config(path.string(), ExperimentConfig{});
        std::filesystem::remove(path);
        CHECK(to_json(back) == j);
    }
    ExperimentConfig c = desk_preset();
    c.saleh.reset();
    c.adc.ideal = true;
    c.receivers = {ReceiverKind::Mmse, ReceiverKind::NaturalElm};
    CHECK(to_json(apply_json(to_json(c), ExperimentConfig{})) == to_json(c));
}

TEST_CASE("config - strict schema")
{
    using nlohmann::json;
    CHECK_THROWS_WITH(apply_json(json{{"bogus_key", 1}}, desk_preset()),
                      Catch::Matchers::ContainsSubstring("bogus_key"));
    CHECK_THROWS_WITH(apply_json(json{{"channel", {{"n_antenas", 8}}}}, desk_preset()),
                      Catch::Matchers::ContainsSubstring("channel.n_antenas"));
    CHECK_THROWS_WITH(apply_json(json{{"training_len", "many"}}, desk_preset()),
                      Catch::Matchers::ContainsSubstring("training_len"));
    CHECK_THROWS_AS(apply_json(json{{"receivers", {"nope"}}}, desk_preset()), ConfigError);
    CHECK_THROWS_AS(apply_json(json{{"adaptive", {{"lambda", 1.5}}}}, desk_preset()), ConfigError);
    CHECK_THROWS_AS(apply_json(json::array(), desk_preset()), ConfigError);
    CHECK_THROWS_AS(preset("laptop"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), ConfigError);

    const ExperimentConfig c = apply_json(json{{"saleh", "bypass"}, {"adc", "ideal"}, {"payload_len", 7}}, desk_preset());
    CHECK_FALSE(c.saleh.has_value());
    CHECK(c.adc.ideal);
    CHECK(c.payload_len == 7);
    CHECK(c.training_len == desk_preset().training_len);
}
