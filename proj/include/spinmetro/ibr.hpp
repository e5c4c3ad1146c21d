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

// Interaction-based readouts and phase-optimized Fisher information sweeps.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinmetro/metrology.hpp"
#include "spinmetro/noise.hpp"
#include "spinmetro/parallel.hpp"
#include "spinmetro/state_prep.hpp"

namespace spinmetro {

enum class ReadoutKind { NONE_LINEAR, ECHO, FLIP_ECHO, FLIP_PRIME_ECHO, OPTIMAL };

inline constexpr std::array<ReadoutKind, 5> kAllReadouts = {
    ReadoutKind::NONE_LINEAR, ReadoutKind::ECHO, ReadoutKind::FLIP_ECHO, ReadoutKind::FLIP_PRIME_ECHO,
    ReadoutKind::OPTIMAL};

constexpr std::string_view to_string(ReadoutKind kind) noexcept {
    switch (kind) {
        case ReadoutKind::NONE_LINEAR: return "NONE_LINEAR";
        case ReadoutKind::ECHO: return "ECHO";
        case ReadoutKind::FLIP_ECHO: return "FLIP_ECHO";
        case ReadoutKind::FLIP_PRIME_ECHO: return "FLIP_PRIME_ECHO";
        case ReadoutKind::OPTIMAL: return "OPTIMAL";
    }
    return "?";
}

inline ReadoutKind parse_readout_kind(std::string_view name) {
    for (ReadoutKind k : kAllReadouts) {
        if (to_string(k) == name) return k;
    }
    throw Error(ErrorCode::invalid_config, "unknown readout kind '" + std::string(name) + "'");
}

/// exp(i pi/2 Jy^2) exp(i pi/2 Jz) exp(i pi/2 Jy^2) for even N. Odd N uses
/// Jy(Jy + 1) in the outer factors and a Jz angle of pi/2 (1 + 1/N).
inline Unitary u_flip(const SpinOps& ops) {
    const CMatrix jy2 = ops.jy * ops.jy;
    if (ops.n_particles % 2 == 0) {
        const Unitary outer = expm_generator(jy2, std::numbers::pi / 2);
        return outer * expm_generator(ops.jz, std::numbers::pi / 2) * outer;
    }
    const Unitary outer = expm_generator(jy2 + ops.jy, std::numbers::pi / 2);
    const double theta = 0.5 * std::numbers::pi * (1.0 + 1.0 / ops.n_particles);
    return outer * expm_generator(ops.jz, theta) * outer;
}

inline Unitary u_flip_prime(const SpinOps& ops) {
    detail::require(ops.n_particles % 2 == 0, ErrorCode::unsupported, "modified flip requires even N");
    const Unitary outer = expm_generator(ops.jy * ops.jy, std::numbers::pi / 2);
    return outer * expm_generator(ops.jz, std::numbers::pi / 4) * outer;
}

/// U_theta: a pi/2 rotation for OAT, CAT, TNT and CSS, nothing otherwise.
inline Unitary linear_readout(SchemeKind kind, const SpinOps& ops) {
    switch (kind) {
        case SchemeKind::OAT:
        case SchemeKind::CAT:
        case SchemeKind::TNT:
        case SchemeKind::CSS: return expm_generator(ops.jy, std::numbers::pi / 2);
        case SchemeKind::TACT:
        case SchemeKind::QPT:
        case SchemeKind::QND: break;
    }
    return Unitary::identity(ops.dim());
}

namespace detail {

// |<psi|exp(i Jn phi)|psi>|^2 from the spectral weights of psi.
struct EchoOverlap {
    RVector lambda;
    RVector weight;

    EchoOverlap(const PureState& psi, const PhaseAxis& axis) {
        const HermitianEigen eig = hermitian_eigen(axis.jn);
        lambda = eig.values;
        weight = (eig.vectors.adjoint() * psi.amplitudes).cwiseAbs2();
    }

    [[nodiscard]] double operator()(double phi) const {
        Complex sum = 0.0;
        for (Index k = 0; k < lambda.size(); ++k) sum += weight(k) * std::exp(kI * (lambda(k) * phi));
        return std::norm(sum);
    }
};

}  // namespace detail

/// Smallest phi in (0, pi] where the echoed state has overlap 1/2 with |N/2>.
inline double find_phi0(const PureState& psi1, const PhaseAxis& axis) {
    const detail::EchoOverlap overlap(psi1, axis);
    constexpr double step = 1e-3;
    const int count = static_cast<int>(std::floor(std::numbers::pi / step));
    double lo = 0.0;
    for (int k = 1; k <= count + 1; ++k) {
        double hi = std::min(k * step, std::numbers::pi);
        if (overlap(hi) - 0.5 <= 0.0) {
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (overlap(mid) - 0.5 > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        lo = hi;
    }
    throw Error(ErrorCode::no_crossing, "echo overlap never reaches 1/2 on (0, pi]");
}

inline double find_phi0(const Unitary& u1, const PhaseAxis& axis) {
    return find_phi0(PureState{u1.u.col(u1.dim() - 1)}, axis);
}

/// U_p U1^dagger built at a given phi0.
inline Unitary u_opt_at(const Unitary& u1, const PhaseAxis& axis, double phi0) {
    const Index d = u1.dim();
    detail::require(d >= 2 && axis.jn.rows() == d, ErrorCode::dimension_mismatch,
                    "readout and axis dimensions differ");
    const Index top = d - 1;
    const CVector psi1 = u1.u.col(top);
    const CVector psi_b = u1.u.adjoint() * HermitianExponential(axis.jn).apply(phi0, psi1);

    CVector psi_p = psi_b;
    psi_p(top) = 0.0;
    const double norm = psi_p.norm();
    detail::require(norm > 1e-8, ErrorCode::basis_deficit, "echoed state has no component orthogonal to |N/2>");
    psi_p /= norm;

    std::vector<CVector> basis{basis_state(d, top).amplitudes, psi_p};
    std::vector<Index> candidates;
    for (Index i = 1; i < top; ++i) candidates.push_back(i);
    candidates.push_back(0);
    for (Index c : candidates) {
        if (static_cast<Index>(basis.size()) == d) break;
        CVector v = basis_state(d, c).amplitudes;
        for (int pass = 0; pass < 2; ++pass) {
            for (const CVector& q : basis) v -= q.dot(v) * q;
        }
        const double vn = v.norm();
        if (vn < 1e-8) continue;
        basis.push_back(v / vn);
    }
    detail::require(static_cast<Index>(basis.size()) == d, ErrorCode::basis_deficit,
                    "could not complete an orthonormal basis");

    CMatrix up(d, d);
    up.row(top) = basis[0].adjoint();
    up.row(0) = basis[1].adjoint();
    for (Index r = 1; r < top; ++r) up.row(r) = basis[static_cast<std::size_t>(r) + 1].adjoint();
    return Unitary{up} * u1.adjoint();
}

inline Unitary u_opt(const Unitary& u1, const PhaseAxis& axis) {
    return u_opt_at(u1, axis, find_phi0(u1, axis));
}

/// Everything a readout sweep needs for one prepared state.
struct SweepContext {
    PrepScheme scheme;
    SpinOps ops;
    Unitary u1;
    QuantumState state;
    PhaseAxis axis;
    double f_q = 0.0;
    std::optional<double> phi0;

    [[nodiscard]] bool is_pure() const noexcept { return std::holds_alternative<PureState>(state); }

    /// phi0 for pure states, else the phase where a Gaussian fidelity of width F_Q drops to 1/2.
    [[nodiscard]] double phi_ref() const {
        if (phi0) return *phi0;
        return std::sqrt(4.0 * std::numbers::ln2 / std::max(f_q, 1e-300));
    }
};

/// Builds U1, the input state, its axis and F_Q. QND uses the y axis and
/// the QPT unitary (same chi_t0 and steps) for its echo-family readouts.
inline SweepContext make_sweep_context(const PrepScheme& scheme_in) {
    SweepContext ctx;
    ctx.scheme = scheme_in.resolved();
    ctx.scheme.validate();
    ctx.ops = build_spin_ops(ctx.scheme.n_particles);
    if (ctx.scheme.kind == SchemeKind::QND) {
        PrepScheme qpt = ctx.scheme;
        qpt.kind = SchemeKind::QPT;
        ctx.u1 = prep_unitary(qpt, ctx.ops);
        ctx.state = qnd_state(ctx.ops, *ctx.scheme.delta);
        ctx.axis = make_axis(ctx.ops, Vec3::UnitY());
        ctx.f_q = qfi(ctx.state, ctx.axis);
        return ctx;
    }
    ctx.u1 = prep_unitary(ctx.scheme, ctx.ops);
    const PureState psi1 = apply(ctx.u1, top_state(ctx.ops));
    ctx.state = psi1;
    ctx.axis = optimal_phase_axis(psi1, ctx.ops);
    ctx.f_q = qfi_pure(psi1, ctx.axis);
    ctx.phi0 = find_phi0(psi1, ctx.axis);
    return ctx;
}

inline Unitary readout_unitary(const SweepContext& ctx, ReadoutKind kind) {
    switch (kind) {
        case ReadoutKind::NONE_LINEAR: return linear_readout(ctx.scheme.kind, ctx.ops);
        case ReadoutKind::ECHO: return ctx.u1.adjoint();
        case ReadoutKind::FLIP_ECHO: return u_flip(ctx.ops) * ctx.u1.adjoint();
        case ReadoutKind::FLIP_PRIME_ECHO: return u_flip_prime(ctx.ops) * ctx.u1.adjoint();
        case ReadoutKind::OPTIMAL:
            detail::require(ctx.phi0.has_value(), ErrorCode::unsupported,
                            "optimal readout requires a pure-state preparation");
            return u_opt_at(ctx.u1, ctx.axis, *ctx.phi0);
    }
    throw Error(ErrorCode::unsupported, "unknown readout");
}

inline std::vector<double> linear_grid(double lo, double hi, int points) {
    detail::require(points >= 2 && hi > lo, ErrorCode::invalid_argument, "bad linear grid");
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) out[i] = lo + (hi - lo) * i / (points - 1);
    out.back() = hi;
    return out;
}

inline constexpr double kPhiStart = 1e-6;

/// 201 points on [1e-6, 2 phi_ref] for echo-family readouts, [phi_ref / 10, 2 phi_ref]
/// for the optimal readout, 2001 points on [1e-6, pi] for linear.
inline std::vector<double> default_phi_grid(const SweepContext& ctx, ReadoutKind kind) {
    if (kind == ReadoutKind::NONE_LINEAR) return linear_grid(kPhiStart, std::numbers::pi, 2001);
    return linear_grid(kPhiStart, 2.0 * ctx.phi_ref(), 201);
}

struct SweepRecord {
    std::string scheme;
    std::string readout;
    double sigma = 0.0;
    double phi_opt = 0.0;
    double f_c = 0.0;
    double f_n = 0.0;
    double f_q = 0.0;
};

/// Noise-free distribution at phase phi through a fixed readout.
class ReadoutEvaluator {
public:
    ReadoutEvaluator(const SweepContext& ctx, Unitary readout)
        : ctx_(&ctx), readout_(std::move(readout)), encoder_(ctx.axis) {}

    [[nodiscard]] ProbDist clean(double phi) const {
        return measurement_distribution(encoder_.encode(ctx_->state, phi), readout_, ctx_->axis);
    }

    [[nodiscard]] ProbDist noisy(double phi, const NoiseKernel& k) const { return apply_noise(clean(phi), k); }

    [[nodiscard]] const Unitary& readout() const noexcept { return readout_; }

private:
    const SweepContext* ctx_;
    Unitary readout_;
    PhaseEncoder encoder_;
};

namespace detail {

inline double noisy_cfi_at(const ProbDist& clean, const NoiseKernel& k, double phi) {
    try {
        return cfi(apply_noise(clean, k));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ill_conditioned) throw;
        throw Error(ErrorCode::ill_conditioned, std::string(e.what()) + " at sigma = " + std::to_string(k.sigma) +
                                                    ", phi = " + std::to_string(phi));
    }
}

/// Noisy CFI, or nullopt where the distribution is ill-conditioned.
inline std::optional<double> try_noisy_cfi(const ProbDist& clean, const NoiseKernel& k) {
    try {
        return cfi(apply_noise(clean, k));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ill_conditioned) throw;
        return std::nullopt;
    }
}

}  // namespace detail

/// Max-over-phi noisy CFI for each sigma: grid argmax, then golden-section
/// refinement between its neighbours. Ill-conditioned points are skipped. Records come back in sigma order.
inline std::vector<SweepRecord> cfi_sweep(const SweepContext& ctx, ReadoutKind kind, const std::vector<double>& sigmas,
                                          const std::vector<double>& phi_grid, int threads = 1) {
    detail::require(!sigmas.empty() && !phi_grid.empty(), ErrorCode::invalid_config,
                    "sigma and phi grids must be non-empty");
    for (double s : sigmas) {
        detail::require(std::isfinite(s) && s >= 0.0, ErrorCode::invalid_config, "sigma values must be >= 0");
    }
    const ReadoutEvaluator eval(ctx, readout_unitary(ctx, kind));
    std::vector<ProbDist> clean(phi_grid.size());
    parallel_for(phi_grid.size(), threads, [&](std::size_t i) { clean[i] = eval.clean(phi_grid[i]); });

    std::vector<SweepRecord> out(sigmas.size());
    parallel_for(sigmas.size(), threads, [&](std::size_t si) {
        const double sigma = sigmas[si];
        const NoiseKernel kernel = noise_kernel(ctx.ops.n_particles, sigma);
        std::size_t best = 0;
        double best_f = -1.0;
        for (std::size_t i = 0; i < phi_grid.size(); ++i) {
            const auto f = detail::try_noisy_cfi(clean[i], kernel);
            if (f && *f > best_f) {
                best_f = *f;
                best = i;
            }
        }
        // Every grid point ill-conditioned: report the first one.
        if (best_f < 0.0) (void)detail::noisy_cfi_at(clean[0], kernel, phi_grid[0]);
        double best_phi = phi_grid[best];
        if (phi_grid.size() >= 2) {
            double a = phi_grid[best == 0 ? 0 : best - 1];
            double b = phi_grid[std::min(best + 1, phi_grid.size() - 1)];
            auto f = [&](double phi) { return detail::try_noisy_cfi(eval.clean(phi), kernel).value_or(-1.0); };
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - g * (b - a);
            double d = a + g * (b - a);
            double fc = f(c);
            double fd = f(d);
            for (int it = 0; it < 80 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
                if (fc > fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = f(d);
                }
                if (fc > best_f) {
                    best_f = fc;
                    best_phi = c;
                }
                if (fd > best_f) {
                    best_f = fd;
                    best_phi = d;
                }
            }
        }
        out[si] = SweepRecord{std::string(to_string(ctx.scheme.kind)), std::string(to_string(kind)), sigma,
                              best_phi, best_f, nqcrb_numeric(ctx.ops.n_particles, ctx.f_q, sigma), ctx.f_q};
    });
    return out;
}

inline std::vector<SweepRecord> cfi_sweep(const SweepContext& ctx, ReadoutKind kind,
                                          const std::vector<double>& sigmas, int threads = 1) {
    return cfi_sweep(ctx, kind, sigmas, default_phi_grid(ctx, kind), threads);
}

/// A pair of noisy distributions at phi and phi + dphi and their Hellinger distance.
struct Snapshot {
    ReadoutKind readout = ReadoutKind::ECHO;
    double phi = 0.0;
    double dphi = 0.0;
    double sigma = 0.0;
    ProbDist at_phi;
    ProbDist at_phi_shifted;
    double hellinger = 0.0;
};

inline Snapshot snapshot(const SweepContext& ctx, ReadoutKind kind, double phi, double dphi, double sigma) {
    const ReadoutEvaluator eval(ctx, readout_unitary(ctx, kind));
    const NoiseKernel kernel = noise_kernel(ctx.ops.n_particles, sigma);
    Snapshot s;
    s.readout = kind;
    s.phi = phi;
    s.dphi = dphi;
    s.sigma = sigma;
    s.at_phi = eval.noisy(phi, kernel);
    s.at_phi_shifted = eval.noisy(phi + dphi, kernel);
    s.hellinger = hellinger(s.at_phi, s.at_phi_shifted);
    return s;
}

}  // namespace spinmetro
