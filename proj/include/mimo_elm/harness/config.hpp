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

// Experiment configuration and its JSON form.
//
// Every key is optional; absent keys keep the value of the preset the
// document is applied on top of. Unknown keys are rejected by name.
//
//   {
//     "channel":  { "n_antennas", "n_users", "carrier_hz", "symbol_duration_s",
//                   "angular_spread_deg", "n_rays", "velocity_mps",
//                   "mean_aoa_range_rad": [lo, hi] },
//     "saleh":    "bypass" | { "alpha_a", "eps_a", "alpha_phi", "eps_phi" },
//     "adc":      "ideal"  | { "bits", "headroom", "bias_scale", "calibration_len" },
//     "power_reference": "post_pa" | "pre_pa",
//     "snr_db_list": [ ... ],
//     "training_len", "payload_len",
//     "receivers": [ "natural_elm", "borrowed_elm", "trained_zf", "zf", "mmse" ],
//     "gamma":    { "natural_elm", "trained_zf", "borrowed_elm", "oselm" },
//     "borrowed_elm": { "hidden", "weight_range" },
//     "adaptive": { "init_len", "frame_training_len", "frame_data_len",
//                   "lambda", "n_frames", "benchmark_training_len" },
//     "trials", "master_seed", "per_user"
//   }

#pragma once

#include "mimo_elm/channel.hpp"
#include "mimo_elm/frontend.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace mimo_elm {

class ConfigError : public Error {
  public:
    using Error::Error;
};

enum class ReceiverKind { NaturalElm, BorrowedElm, TrainedZf, Zf, Mmse };

inline constexpr std::string_view receiver_name(ReceiverKind r) {
    switch (r) {
    case ReceiverKind::NaturalElm: return "natural_elm";
    case ReceiverKind::BorrowedElm: return "borrowed_elm";
    case ReceiverKind::TrainedZf: return "trained_zf";
    case ReceiverKind::Zf: return "zf";
    case ReceiverKind::Mmse: return "mmse";
    }
    return "?";
}

inline const std::vector<ReceiverKind>& all_receivers() {
    static const std::vector<ReceiverKind> all{ReceiverKind::NaturalElm, ReceiverKind::BorrowedElm,
                                               ReceiverKind::TrainedZf, ReceiverKind::Zf, ReceiverKind::Mmse};
    return all;
}

inline ReceiverKind parse_receiver(std::string_view name) {
    for (auto r : all_receivers())
        if (receiver_name(r) == name) return r;
    throw ConfigError("receivers: unknown receiver '" + std::string(name) + "'");
}

enum class PowerReference { PostPa, PrePa };

struct AdcSettings {
    bool ideal = false;
    int bits = 6;
    double headroom = kDefaultHeadroom;
    double bias_scale = 0.1;
    int calibration_len = 200;
};

struct GammaSettings {
    double natural_elm = 1.0;
    double trained_zf = 1.0;
    double borrowed_elm = 1.0;
    double oselm = 1.0;
};

struct BorrowedElmSettings {
    int hidden = 512;
    double weight_range = 0.1;
};

struct AdaptiveSettings {
    int init_len = 3000;
    int frame_training_len = 300;
    int frame_data_len = 1700;
    double lambda = 0.98;
    int n_frames = 10;
    int benchmark_training_len = 3000;
};

struct ExperimentConfig {
    ChannelConfig channel{};
    std::optional<SalehParams> saleh = SalehParams{}; // nullopt: PA bypassed
    AdcSettings adc{};
    PowerReference power_reference = PowerReference::PostPa;
    std::vector<double> snr_db_list{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    int training_len = 3000;
    int payload_len = 20000;
    std::vector<ReceiverKind> receivers = all_receivers();
    GammaSettings gamma{};
    BorrowedElmSettings borrowed{};
    AdaptiveSettings adaptive{};
    int trials = 1;
    std::uint64_t master_seed = 1;
    bool per_user = false;

    PaModel pa() const { return saleh ? PaModel{false, *saleh} : PaModel{true, {}}; }

    bool runs(ReceiverKind r) const { return std::find(receivers.begin(), receivers.end(), r) != receivers.end(); }

    void validate() const {
        try {
            channel.validate();
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        if (saleh && !(saleh->eps_a > 0.0 && saleh->eps_phi > 0.0))
            throw ConfigError("saleh.eps_a and saleh.eps_phi must be > 0");
        if (!adc.ideal) {
            if (adc.bits < 1 || adc.bits > 30) throw ConfigError("adc.bits must lie in [1, 30]");
            if (!(adc.headroom > 0.0)) throw ConfigError("adc.headroom must be > 0");
        }
        if (!(adc.bias_scale >= 0.0)) throw ConfigError("adc.bias_scale must be >= 0");
        if (adc.calibration_len < 1) throw ConfigError("adc.calibration_len must be >= 1");
        if (adc.calibration_len * 2 * channel.n_antennas < 100)
            throw ConfigError("adc.calibration_len too short: need >= 100 real calibration samples");
        if (snr_db_list.empty()) throw ConfigError("snr_db_list must be non-empty");
        if (training_len < 1) throw ConfigError("training_len must be >= 1");
        if (payload_len < 1) throw ConfigError("payload_len must be >= 1");
        if (receivers.empty()) throw ConfigError("receivers must be non-empty");
        for (double g : {gamma.natural_elm, gamma.trained_zf, gamma.borrowed_elm, gamma.oselm})
            if (!(g >= 0.0)) throw ConfigError("gamma values must be >= 0");
        if (borrowed.hidden < 1) throw ConfigError("borrowed_elm.hidden must be >= 1");
        if (!(borrowed.weight_range >= 0.0)) throw ConfigError("borrowed_elm.weight_range must be >= 0");
        if (adaptive.init_len < 1) throw ConfigError("adaptive.init_len must be >= 1");
        if (adaptive.frame_training_len < 1) throw ConfigError("adaptive.frame_training_len must be >= 1");
        if (adaptive.frame_data_len < 1) throw ConfigError("adaptive.frame_data_len must be >= 1");
        if (adaptive.n_frames < 1) throw ConfigError("adaptive.n_frames must be >= 1");
        if (adaptive.benchmark_training_len < 1) throw ConfigError("adaptive.benchmark_training_len must be >= 1");
        if (!(adaptive.lambda > 0.0 && adaptive.lambda <= 1.0)) throw ConfigError("adaptive.lambda must lie in (0, 1]");
        if (trials < 1) throw ConfigError("trials must be >= 1");
    }
};

inline constexpr double kKmhToMps = 1000.0 / 3600.0;

// Desk scale: N = 64 so CI runs in seconds to minutes.
inline ExperimentConfig desk_preset() {
    ExperimentConfig c;
    c.channel.n_antennas = 64;
    c.channel.n_users = 10;
    c.channel.velocity_mps = 100.0 * kKmhToMps;
    return c;
}

// Full-size array: N = 256.
inline ExperimentConfig paper_preset() {
    ExperimentConfig c = desk_preset();
    c.channel.n_antennas = 256;
    return c;
}

inline ExperimentConfig preset(std::string_view name) {
    if (name == "desk") return desk_preset();
    if (name == "paper") return paper_preset();
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk or paper)");
}

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            std::string path = where.empty() ? it.key() : std::string(where) + "." + it.key();
            throw ConfigError("unknown config key '" + path + "'");
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        std::string path = where.empty() ? key : std::string(where) + "." + key;
        throw ConfigError("config key '" + path + "' has the wrong type");
    }
}

inline const json& object_at(const json& obj, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_object()) throw ConfigError(std::string("config key '") + key + "' must be an object");
    return v;
}

} // namespace detail

// Applies a JSON document on top of `base`.
inline ExperimentConfig apply_json(const nlohmann::json& doc, ExperimentConfig base) {
    using detail::read;
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    detail::reject_unknown(doc, "",
                           {"channel", "saleh", "adc", "power_reference", "snr_db_list", "training_len",
                            "payload_len", "receivers", "gamma", "borrowed_elm", "adaptive", "trials", "master_seed",
                            "per_user"});
    ExperimentConfig c = std::move(base);

    if (doc.contains("channel")) {
        const auto& j = detail::object_at(doc, "channel");
        detail::reject_unknown(j, "channel",
                               {"n_antennas", "n_users", "carrier_hz", "symbol_duration_s", "angular_spread_deg",
                                "n_rays", "velocity_mps", "mean_aoa_range_rad"});
        read(j, "n_antennas", c.channel.n_antennas, "channel");
        read(j, "n_users", c.channel.n_users, "channel");
        read(j, "carrier_hz", c.channel.carrier_hz, "channel");
        read(j, "symbol_duration_s", c.channel.symbol_duration_s, "channel");
        read(j, "angular_spread_deg", c.channel.angular_spread_deg, "channel");
        read(j, "n_rays", c.channel.n_rays, "channel");
        read(j, "velocity_mps", c.channel.velocity_mps, "channel");
        if (j.contains("mean_aoa_range_rad")) {
            std::vector<double> range;
            read(j, "mean_aoa_range_rad", range, "channel");
            if (range.size() != 2) throw ConfigError("config key 'channel.mean_aoa_range_rad' must have 2 entries");
            c.channel.mean_aoa_range_rad = {range[0], range[1]};
        }
    }
    if (doc.contains("saleh")) {
        const auto& j = doc.at("saleh");
        if (j.is_string()) {
            if (j.get<std::string>() != "bypass") throw ConfigError("config key 'saleh' must be \"bypass\" or an object");
            c.saleh.reset();
        } else if (j.is_object()) {
            detail::reject_unknown(j, "saleh", {"alpha_a", "eps_a", "alpha_phi", "eps_phi"});
            SalehParams p = c.saleh.value_or(SalehParams{});
            read(j, "alpha_a", p.alpha_a, "saleh");
            read(j, "eps_a", p.eps_a, "saleh");
            read(j, "alpha_phi", p.alpha_phi, "saleh");
            read(j, "eps_phi", p.eps_phi, "saleh");
            c.saleh = p;
        } else {
            throw ConfigError("config key 'saleh' must be \"bypass\" or an object");
        }
    }
    if (doc.contains("adc")) {
        const auto& j = doc.at("adc");
        if (j.is_string()) {
            if (j.get<std::string>() != "ideal") throw ConfigError("config key 'adc' must be \"ideal\" or an object");
            c.adc.ideal = true;
        } else if (j.is_object()) {
            detail::reject_unknown(j, "adc", {"bits", "headroom", "bias_scale", "calibration_len", "ideal"});
            read(j, "ideal", c.adc.ideal, "adc");
            read(j, "bits", c.adc.bits, "adc");
            read(j, "headroom", c.adc.headroom, "adc");
            read(j, "bias_scale", c.adc.bias_scale, "adc");
            read(j, "calibration_len", c.adc.calibration_len, "adc");
        } else {
            throw ConfigError("config key 'adc' must be \"ideal\" or an object");
        }
    }
    if (doc.contains("power_reference")) {
        std::string s;
        read(doc, "power_reference", s, "");
        if (s == "post_pa") c.power_reference = PowerReference::PostPa;
        else if (s == "pre_pa") c.power_reference = PowerReference::PrePa;
        else throw ConfigError("config key 'power_reference' must be post_pa or pre_pa");
    }
    read(doc, "snr_db_list", c.snr_db_list, "");
    read(doc, "training_len", c.training_len, "");
    read(doc, "payload_len", c.payload_len, "");
    if (doc.contains("receivers")) {
        std::vector<std::string> names;
        read(doc, "receivers", names, "");
        c.receivers.clear();
        for (const auto& n : names) c.receivers.push_back(parse_receiver(n));
    }
    if (doc.contains("gamma")) {
        const auto& j = detail::object_at(doc, "gamma");
        detail::reject_unknown(j, "gamma", {"natural_elm", "trained_zf", "borrowed_elm", "oselm"});
        read(j, "natural_elm", c.gamma.natural_elm, "gamma");
        read(j, "trained_zf", c.gamma.trained_zf, "gamma");
        read(j, "borrowed_elm", c.gamma.borrowed_elm, "gamma");
        read(j, "oselm", c.gamma.oselm, "gamma");
    }
    if (doc.contains("borrowed_elm")) {
        const auto& j = detail::object_at(doc, "borrowed_elm");
        detail::reject_unknown(j, "borrowed_elm", {"hidden", "weight_range"});
        read(j, "hidden", c.borrowed.hidden, "borrowed_elm");
        read(j, "weight_range", c.borrowed.weight_range, "borrowed_elm");
    }
    if (doc.contains("adaptive")) {
        const auto& j = detail::object_at(doc, "adaptive");
        detail::reject_unknown(j, "adaptive",
                               {"init_len", "frame_training_len", "frame_data_len", "lambda", "n_frames",
                                "benchmark_training_len"});
        read(j, "init_len", c.adaptive.init_len, "adaptive");
        read(j, "frame_training_len", c.adaptive.frame_training_len, "adaptive");
        read(j, "frame_data_len", c.adaptive.frame_data_len, "adaptive");
        read(j, "lambda", c.adaptive.lambda, "adaptive");
        read(j, "n_frames", c.adaptive.n_frames, "adaptive");
        read(j, "benchmark_training_len", c.adaptive.benchmark_training_len, "adaptive");
    }
    read(doc, "trials", c.trials, "");
    read(doc, "master_seed", c.master_seed, "");
    read(doc, "per_user", c.per_user, "");
    c.validate();
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["channel"] = {{"n_antennas", c.channel.n_antennas},
                    {"n_users", c.channel.n_users},
                    {"carrier_hz", c.channel.carrier_hz},
                    {"symbol_duration_s", c.channel.symbol_duration_s},
                    {"angular_spread_deg", c.channel.angular_spread_deg},
                    {"n_rays", c.channel.n_rays},
                    {"velocity_mps", c.channel.velocity_mps},
                    {"mean_aoa_range_rad", {c.channel.mean_aoa_range_rad.first, c.channel.mean_aoa_range_rad.second}}};
    if (c.saleh)
        j["saleh"] = {{"alpha_a", c.saleh->alpha_a},
                      {"eps_a", c.saleh->eps_a},
                      {"alpha_phi", c.saleh->alpha_phi},
                      {"eps_phi", c.saleh->eps_phi}};
    else
        j["saleh"] = "bypass";
    j["adc"] = {{"ideal", c.adc.ideal},
                {"bits", c.adc.bits},
                {"headroom", c.adc.headroom},
                {"bias_scale", c.adc.bias_scale},
                {"calibration_len", c.adc.calibration_len}};
    j["power_reference"] = c.power_reference == PowerReference::PostPa ? "post_pa" : "pre_pa";
    j["snr_db_list"] = c.snr_db_list;
    j["training_len"] = c.training_len;
    j["payload_len"] = c.payload_len;
    std::vector<std::string> names;
    for (auto r : c.receivers) names.emplace_back(receiver_name(r));
    j["receivers"] = names;
    j["gamma"] = {{"natural_elm", c.gamma.natural_elm},
                  {"trained_zf", c.gamma.trained_zf},
                  {"borrowed_elm", c.gamma.borrowed_elm},
                  {"oselm", c.gamma.oselm}};
    j["borrowed_elm"] = {{"hidden", c.borrowed.hidden}, {"weight_range", c.borrowed.weight_range}};
    j["adaptive"] = {{"init_len", c.adaptive.init_len},
                     {"frame_training_len", c.adaptive.frame_training_len},
                     {"frame_data_len", c.adaptive.frame_data_len},
                     {"lambda", c.adaptive.lambda},
                     {"n_frames", c.adaptive.n_frames},
                     {"benchmark_training_len", c.adaptive.benchmark_training_len}};
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["per_user"] = c.per_user;
    return j;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = desk_preset()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return apply_json(doc, std::move(base));
}

} // namespace mimo_elm
