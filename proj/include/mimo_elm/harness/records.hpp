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

#pragma once

#include "mimo_elm/numeric.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace mimo_elm {

struct SerRecord {
    std::string experiment;
    std::string receiver;
    double snr_db = 0.0;
    int frame = -1; // -1 outside the adaptive experiment
    std::int64_t symbols = 0;
    std::int64_t errors = 0;
    double ser = 0.0;
    std::uint64_t seed = 0;

    // Binomial standard error of the SER estimate.
    double std_error() const {
        return symbols > 0 ? std::sqrt(ser * (1.0 - ser) / static_cast<double>(symbols)) : 0.0;
    }
};

struct ErrorCount {
    std::int64_t symbols = 0;
    std::int64_t errors = 0;

    ErrorCount& operator+=(const ErrorCount& o) {
        symbols += o.symbols;
        errors += o.errors;
        return *this;
    }
};

// Error counts keyed by (snr index, frame, receiver slot). Merging is a sum,
// so the result does not depend on the order trials finish in.
class Tally {
  public:
    using Key = std::tuple<int, int, int>;

    void add(int snr_index, int frame, int slot, std::int64_t symbols, std::int64_t errors) {
        counts_[{snr_index, frame, slot}] += ErrorCount{symbols, errors};
    }

    Tally& operator+=(const Tally& o) {
        for (const auto& [k, v] : o.counts_) counts_[k] += v;
        return *this;
    }

    const std::map<Key, ErrorCount>& counts() const { return counts_; }

  private:
    std::map<Key, ErrorCount> counts_;
};

inline constexpr const char* kCsvHeader = "experiment,receiver,snr_db,frame,symbols,errors,ser,seed";

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void write_csv(const std::vector<SerRecord>& records, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.experiment << ',' << r.receiver << ',' << format_number(r.snr_db) << ',' << r.frame << ','
            << r.symbols << ',' << r.errors << ',' << format_number(r.ser) << ',' << r.seed << '\n';
    }
}

inline void write_csv(const std::vector<SerRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_csv(records, out);
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

} // namespace mimo_elm
