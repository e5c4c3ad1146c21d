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

#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "spinmetro/spin_core.hpp"

namespace spinmetro {

enum class SchemeKind { OAT, TACT, TNT, CAT, QPT, QND, CSS };

inline constexpr std::array<SchemeKind, 7> kAllSchemes = {SchemeKind::OAT, SchemeKind::TACT, SchemeKind::TNT,
                                                           SchemeKind::CAT, SchemeKind::QPT,  SchemeKind::QND,
                                                           SchemeKind::CSS};

constexpr std::string_view to_string(SchemeKind kind) noexcept {
    switch (kind) {
        case SchemeKind::OAT: return "OAT";
        case SchemeKind::TACT: return "TACT";
        case SchemeKind::TNT: return "TNT";
        case SchemeKind::CAT: return "CAT";
        case SchemeKind::QPT: return "QPT";
        case SchemeKind::QND: return "QND";
        case SchemeKind::CSS: return "CSS";
    }
    return "?";
}

inline SchemeKind parse_scheme_kind(std::string_view name) {
    for (SchemeKind k : kAllSchemes) {
        if (to_string(k) == name) return k;
    }
    throw Error(ErrorCode::invalid_config, "unknown scheme kind '" + std::string(name) + "'");
}

namespace defaults {
inline constexpr double r_oat = 0.2;
inline constexpr double r_tact = 0.032;
inline constexpr double r_tnt = 0.0715;
inline constexpr double r_cat = std::numbers::pi / 2;
inline constexpr double chi_t0 = 20.0;
inline constexpr double qnd_delta = 1.0;
}  // namespace defaults

/// Midpoint steps used by qpt_evolve when none are given.
inline int default_qpt_steps(double chi_t0) {
    return std::max(200, static_cast<int>(std::ceil(160.0 * chi_t0)));
}

/// A state-preparation recipe. Parameters that a kind does not use stay empty.
/// QND keeps chi_t0/steps: its echo-family readouts reuse the QPT unitary.
struct PrepScheme {
    SchemeKind kind = SchemeKind::CSS;
    int n_particles = 0;
    std::optional<double> r;
    std::optional<double> chi_t0;
    std::optional<double> delta;
    std::optional<int> steps;

    [[nodiscard]] bool is_pure() const noexcept { return kind != SchemeKind::QND; }

    /// Missing parameters filled with the default operating point.
    [[nodiscard]] PrepScheme resolved() const {
        PrepScheme out = *this;
        switch (kind) {
            case SchemeKind::OAT: out.r = r.value_or(defaults::r_oat); break;
            case SchemeKind::TACT: out.r = r.value_or(defaults::r_tact); break;
            case SchemeKind::TNT: out.r = r.value_or(defaults::r_tnt); break;
            case SchemeKind::CAT: out.r = r.value_or(defaults::r_cat); break;
            case SchemeKind::QND:
                out.delta = delta.value_or(defaults::qnd_delta);
                [[fallthrough]];
            case SchemeKind::QPT:
                out.chi_t0 = chi_t0.value_or(defaults::chi_t0);
                out.steps = steps.value_or(default_qpt_steps(*out.chi_t0));
                break;
            case SchemeKind::CSS: break;
        }
        return out;
    }

    void validate() const {
        detail::require(n_particles >= 1, ErrorCode::invalid_dimension, "scheme needs n >= 1");
        auto finite = [](const std::optional<double>& v) { return !v || std::isfinite(*v); };
        detail::require(finite(r) && finite(chi_t0) && finite(delta), ErrorCode::invalid_config,
                        "scheme parameters must be finite");
        switch (kind) {
            case SchemeKind::OAT:
            case SchemeKind::TACT:
            case SchemeKind::TNT:
            case SchemeKind::CAT:
                detail::require(r.has_value(), ErrorCode::invalid_config,
                                std::string(to_string(kind)) + " requires r");
                break;
            case SchemeKind::QND:
                detail::require(delta.has_value() && *delta > 0.0, ErrorCode::invalid_config,
                                "QND requires delta > 0");
                detail::require(n_particles % 2 == 0, ErrorCode::unsupported, "QND requires even N");
                [[fallthrough]];
            case SchemeKind::QPT:
                detail::require(chi_t0.has_value(), ErrorCode::invalid_config, "requires chi_t0");
                detail::require(!steps || *steps >= 1, ErrorCode::invalid_config, "steps must be >= 1");
                break;
            case SchemeKind::CSS: break;
        }
        if (kind == SchemeKind::CAT) {
            detail::require(n_particles % 2 == 0, ErrorCode::unsupported, "CAT preparation requires even N");
        }
    }

    static PrepScheme make(SchemeKind kind, int n) {
        PrepScheme s;
        s.kind = kind;
        s.n_particles = n;
        return s.resolved();
    }
};

namespace detail {

// real * complex without promoting the real factor
inline CMatrix real_times(const RMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows(), b.cols());
    out.real() = a * b.real();
    out.imag() = a * b.imag();
    return out;
}

}  // namespace detail

/// Time-ordered exp(-i int_0^t0 H dt) for H/chi = Jx cos^2(pi t / 2 t0) + Jz^2 sin^2(pi t / 2 t0),
/// as a product of midpoint exponentials, latest time leftmost. Time is in units of 1/chi.
inline Unitary qpt_evolve(const SpinOps& ops, double chi_t0, int steps) {
    detail::require(steps >= 1, ErrorCode::invalid_argument, "qpt_evolve needs steps >= 1");
    detail::require(std::isfinite(chi_t0) && chi_t0 >= 0.0, ErrorCode::invalid_argument,
                    "chi_t0 must be finite and non-negative");
    const Index d = ops.dim();
    const RMatrix jx = ops.jx.real();
    const RVector jz2 = ops.jz.real().diagonal().array().square();
    const double dt = chi_t0 / steps;

    CMatrix u = CMatrix::Identity(d, d);
    for (int k = 0; k < steps; ++k) {
        const double t = (k + 0.5) * dt;
        const double c = std::cos(0.5 * std::numbers::pi * t / chi_t0);
        const double s = std::sin(0.5 * std::numbers::pi * t / chi_t0);
        RMatrix h = (c * c) * jx;
        h.diagonal() += (s * s) * jz2;
        Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
        const RMatrix& v = es.eigenvectors();
        CMatrix rotated = detail::real_times(v.transpose(), u);
        for (Index i = 0; i < d; ++i) rotated.row(i) *= std::exp(-kI * (es.eigenvalues()(i) * dt));
        u = detail::real_times(v, rotated);
    }
    return Unitary{u};
}

/// U1 with |psi_1> = U1 |N/2>.
inline Unitary prep_unitary(const PrepScheme& scheme_in, const SpinOps& ops) {
    const PrepScheme scheme = scheme_in.resolved();
    scheme.validate();
    detail::require(scheme.n_particles == ops.n_particles, ErrorCode::dimension_mismatch,
                    "scheme N does not match spin operators");
    detail::require(scheme.kind != SchemeKind::QND, ErrorCode::unsupported,
                    "QND preparation is a mixed state and has no unitary");

    const Unitary rotate = expm_generator(ops.jy, std::numbers::pi / 2);
    const CMatrix jz2 = ops.jz * ops.jz;
    const double n = ops.n_particles;
    switch (scheme.kind) {
        case SchemeKind::OAT:
        case SchemeKind::CAT: return expm_generator(jz2, *scheme.r) * rotate;
        case SchemeKind::TACT: return expm_generator(ops.jx * ops.jx - ops.jy * ops.jy, *scheme.r);
        case SchemeKind::TNT: return expm_generator(jz2 - 0.5 * n * ops.jx, *scheme.r) * rotate;
        case SchemeKind::QPT: return qpt_evolve(ops, *scheme.chi_t0, *scheme.steps) * rotate;
        case SchemeKind::CSS: return rotate;
        case SchemeKind::QND: break;
    }
    throw Error(ErrorCode::unsupported, "no unitary for scheme");
}

/// Diagonal Gaussian mixture of Jz eigenstates of width delta.
inline MixedState qnd_state(const SpinOps& ops, double delta) {
    detail::require(delta > 0.0 && std::isfinite(delta), ErrorCode::invalid_argument, "QND delta must be > 0");
    detail::require(ops.n_particles % 2 == 0, ErrorCode::unsupported, "QND state requires even N");
    const Index d = ops.dim();
    RVector w(d);
    for (Index i = 0; i < d; ++i) w(i) = std::exp(-ops.m(i) * ops.m(i) / (delta * delta));
    w /= w.sum();
    return MixedState{w.cast<Complex>().asDiagonal()};
}

inline QuantumState prepare_state(const PrepScheme& scheme_in, const SpinOps& ops) {
    const PrepScheme scheme = scheme_in.resolved();
    scheme.validate();
    if (scheme.kind == SchemeKind::QND) return qnd_state(ops, *scheme.delta);
    return apply(prep_unitary(scheme, ops), top_state(ops));
}

}  // namespace spinmetro
