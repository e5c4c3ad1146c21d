// Copyright 2026 The spinmetro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV and JSON serialization. Numbers use 17 significant digits so output is
// byte-identical across platforms.

#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinmetro/ibr.hpp"
#include "spinmetro/optimizer.hpp"

namespace spinmetro {

inline std::string format_double(double x) {
    if (x == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace csv {

inline void husimi(std::ostream& os, const HusimiField& f) {
    os << "theta,phi,q\n";
    for (int i = 0; i < f.n_theta; ++i) {
        for (int j = 0; j < f.n_phi; ++j) {
            os << format_double(f.theta[i]) << ',' << format_double(f.phi[j]) << ',' << format_double(f.at(i, j))
               << '\n';
        }
    }
}

inline void distribution(std::ostream& os, const ProbDist& d) {
    os << "m,p,dp\n";
    const double half = 0.5 * static_cast<double>(d.size() - 1);
    for (Index i = 0; i < d.size(); ++i) {
        os << format_double(static_cast<double>(i) - half) << ',' << format_double(d.p(i)) << ','
           << format_double(d.dp(i)) << '\n';
    }
}

inline void nqcrb_curve(std::ostream& os, const std::vector<NqcrbResult>& rows) {
    os << "sigma_over_n,f_numeric,f_analytic,f_q\n";
    for (const NqcrbResult& r : rows) {
        os << format_double(r.sigma / r.n_particles) << ',' << format_double(r.f_numeric) << ','
           << format_double(r.f_analytic) << ',' << format_double(r.f_q) << '\n';
    }
}

/// Rows sorted by (scheme, readout, sigma).
inline void sweep(std::ostream& os, std::vector<SweepRecord> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRecord& a, const SweepRecord& b) {
        if (a.scheme != b.scheme) return a.scheme < b.scheme;
        if (a.readout != b.readout) return a.readout < b.readout;
        return a.sigma < b.sigma;
    });
    os << "scheme,readout,sigma,phi_opt,f_c,f_n,f_q\n";
    for (const SweepRecord& r : rows) {
        os << r.scheme << ',' << r.readout << ',' << format_double(r.sigma) << ',' << format_double(r.phi_opt) << ','
           << format_double(r.f_c) << ',' << format_double(r.f_n) << ',' << format_double(r.f_q) << '\n';
    }
}

inline void trace(std::ostream& os, const std::vector<OptTrace>& rows) {
    os << "iteration,f_sigma,f_zero,d_h\n";
    for (const OptTrace& r : rows) {
        os << r.iteration << ',' << format_double(r.f_sigma) << ',' << format_double(r.f_zero) << ','
           << format_double(r.d_h_to_popt) << '\n';
    }
}

inline void certification(std::ostream& os, const std::vector<CertRow>& rows) {
    os << "seed,f_sigma,bound\n";
    for (const CertRow& r : rows) os << r.seed << ',' << format_double(r.f_sigma) << ',' << format_double(r.bound) << '\n';
}

}  // namespace csv

inline nlohmann::ordered_json to_json(const PrepScheme& s) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(s.kind));
    j["n"] = s.n_particles;
    j["r"] = s.r ? nlohmann::ordered_json(*s.r) : nlohmann::ordered_json(nullptr);
    j["chi_t0"] = s.chi_t0 ? nlohmann::ordered_json(*s.chi_t0) : nlohmann::ordered_json(nullptr);
    j["delta"] = s.delta ? nlohmann::ordered_json(*s.delta) : nlohmann::ordered_json(nullptr);
    j["steps"] = s.steps ? nlohmann::ordered_json(*s.steps) : nlohmann::ordered_json(nullptr);
    return j;
}

/// {"kind", "n", "r"?, "chi_t0"?, "delta"?, "steps"?}; null counts as absent.
template <typename Json>
PrepScheme scheme_from_json(const Json& j) {
    detail::require(j.is_object(), ErrorCode::invalid_config, "scheme must be a JSON object");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        detail::require(key == "kind" || key == "n" || key == "r" || key == "chi_t0" || key == "delta" ||
                            key == "steps",
                        ErrorCode::invalid_config, "unknown scheme field '" + key + "'");
    }
    detail::require(j.contains("kind") && j.at("kind").is_string(), ErrorCode::invalid_config,
                    "scheme.kind must be a string");
    detail::require(j.contains("n") && j.at("n").is_number_integer(), ErrorCode::invalid_config,
                    "scheme.n must be an integer");
    PrepScheme s;
    s.kind = parse_scheme_kind(j.at("kind").template get<std::string>());
    s.n_particles = j.at("n").template get<int>();
    auto real = [&](const char* key, std::optional<double>& slot) {
        if (!j.contains(key) || j.at(key).is_null()) return;
        detail::require(j.at(key).is_number(), ErrorCode::invalid_config, std::string("scheme.") + key + " must be a number");
        slot = j.at(key).template get<double>();
    };
    real("r", s.r);
    real("chi_t0", s.chi_t0);
    real("delta", s.delta);
    if (j.contains("steps") && !j.at("steps").is_null()) {
        detail::require(j.at("steps").is_number_integer(), ErrorCode::invalid_config, "scheme.steps must be an integer");
        s.steps = j.at("steps").template get<int>();
    }
    s = s.resolved();
    s.validate();
    return s;
}

}  // namespace spinmetro
