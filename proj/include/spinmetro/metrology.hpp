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
#include <cmath>
#include <string>

#include "spinmetro/spin_core.hpp"

namespace spinmetro {

using Vec3 = Eigen::Vector3d;

/// Phase generator Jn = J . n.
struct PhaseAxis {
    Vec3 n = Vec3::UnitZ();
    CMatrix jn;
};

inline PhaseAxis make_axis(const SpinOps& ops, const Vec3& direction) {
    const double norm = direction.norm();
    detail::require(std::isfinite(norm) && norm > 0.0, ErrorCode::invalid_argument,
                    "phase axis must be a non-zero finite vector");
    PhaseAxis axis;
    axis.n = direction / norm;
    axis.jn = axis.n.x() * ops.jx + axis.n.y() * ops.jy + axis.n.z() * ops.jz;
    return axis;
}

/// Symmetrized covariance of (Jx, Jy, Jz).
inline Eigen::Matrix3d covariance_matrix(const QuantumState& s, const SpinOps& ops) {
    const std::array<const CMatrix*, 3> j = {&ops.jx, &ops.jy, &ops.jz};
    std::array<double, 3> mean{};
    for (int k = 0; k < 3; ++k) mean[k] = expectation(s, *j[k]);
    Eigen::Matrix3d cov;
    for (int k = 0; k < 3; ++k) {
        for (int l = k; l < 3; ++l) {
            const CMatrix sym = 0.5 * (*j[k] * *j[l] + *j[l] * *j[k]);
            cov(k, l) = expectation(s, sym) - mean[k] * mean[l];
            cov(l, k) = cov(k, l);
        }
    }
    return cov;
}

namespace detail {

inline Vec3 fix_axis_sign(Vec3 n) {
    for (int k = 0; k < 3; ++k) {
        if (std::abs(n(k)) > 1e-9) {
            if (n(k) < 0.0) n = -n;
            break;
        }
    }
    return n;
}

}  // namespace detail

/// Top eigenvector of the covariance matrix. Within a degenerate top
/// eigenspace, prefers z, then y, then x; the first non-zero component is positive.
inline PhaseAxis optimal_phase_axis(const PureState& s, const SpinOps& ops) {
    validate(s, 1e-10);
    detail::require(s.dim() == ops.dim(), ErrorCode::dimension_mismatch,
                    "state dimension does not match spin operators");
    const Eigen::Matrix3d cov = covariance_matrix(QuantumState{s}, ops);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Eigen::Vector3d w = es.eigenvalues();
    const double tol = 1e-9 * std::max(1.0, std::abs(w(2)));

    Eigen::Matrix<double, 3, Eigen::Dynamic> top(3, 0);
    for (int k = 2; k >= 0; --k) {
        if (w(2) - w(k) < tol) {
            top.conservativeResize(Eigen::NoChange, top.cols() + 1);
            top.col(top.cols() - 1) = es.eigenvectors().col(k);
        }
    }
    Vec3 n = top.col(0);
    if (top.cols() > 1) {
        for (const Vec3& pref : {Vec3(Vec3::UnitZ()), Vec3(Vec3::UnitY()), Vec3(Vec3::UnitX())}) {
            const Vec3 proj = top * (top.transpose() * pref);
            if (proj.norm() > 1e-6) {
                n = proj.normalized();
                break;
            }
        }
    }
    return make_axis(ops, detail::fix_axis_sign(n));
}

inline PhaseAxis optimal_phase_axis(const QuantumState& s, const SpinOps& ops) {
    const auto* pure = std::get_if<PureState>(&s);
    detail::require(pure != nullptr, ErrorCode::unsupported,
                    "mixed states need an explicit phase axis");
    return optimal_phase_axis(*pure, ops);
}

/// exp(i Jn phi) for one axis and many phases.
class PhaseEncoder {
public:
    explicit PhaseEncoder(const PhaseAxis& axis) : exp_(axis.jn) {}

    [[nodiscard]] Unitary unitary(double phi) const { return exp_.at(phi); }

    [[nodiscard]] PureState encode(const PureState& s, double phi) const {
        return PureState{exp_.apply(phi, s.amplitudes)};
    }

    [[nodiscard]] QuantumState encode(const QuantumState& s, double phi) const {
        if (const auto* pure = std::get_if<PureState>(&s)) return encode(*pure, phi);
        return apply(exp_.at(phi), std::get<MixedState>(s));
    }

private:
    HermitianExponential exp_;
};

inline QuantumState encode_phase(const QuantumState& s, const PhaseAxis& axis, double phi) {
    return PhaseEncoder(axis).encode(s, phi);
}

/// Outcome probabilities over m = -N/2..N/2 and their phase derivatives.
struct ProbDist {
    RVector p;
    RVector dp;

    [[nodiscard]] Index size() const noexcept { return p.size(); }
};

inline void validate(const ProbDist& d) {
    detail::require(d.p.size() == d.dp.size() && d.p.size() >= 1, ErrorCode::dimension_mismatch,
                    "p and dp must have equal non-zero length");
    detail::require(d.p.allFinite() && d.dp.allFinite(), ErrorCode::invalid_argument,
                    "distribution has non-finite entries");
    detail::require(d.p.minCoeff() >= -1e-12, ErrorCode::invalid_argument, "negative probability");
    detail::require(std::abs(d.p.sum() - 1.0) <= 1e-10, ErrorCode::invalid_argument,
                    "probabilities do not sum to 1");
    detail::require(std::abs(d.dp.sum()) <= 1e-10 * std::max(1.0, d.dp.cwiseAbs().sum()),
                    ErrorCode::invalid_argument, "derivatives do not sum to 0");
}

/// P_m = <m|U rho U^dagger|m> with the commutator-form derivative.
inline ProbDist measurement_distribution(const PureState& s, const Unitary& readout, const PhaseAxis& axis) {
    detail::require(s.dim() == readout.dim() && s.dim() == axis.jn.rows(), ErrorCode::dimension_mismatch,
                    "state, readout and axis dimensions differ");
    const CVector a = readout.u * s.amplitudes;
    const CVector b = readout.u * (kI * (axis.jn * s.amplitudes));
    ProbDist d;
    d.p = a.cwiseAbs2();
    d.dp.resize(a.size());
    for (Index i = 0; i < a.size(); ++i) d.dp(i) = 2.0 * (std::conj(a(i)) * b(i)).real();
    return d;
}

inline ProbDist measurement_distribution(const MixedState& s, const Unitary& readout, const PhaseAxis& axis) {
    detail::require(s.dim() == readout.dim() && s.dim() == axis.jn.rows(), ErrorCode::dimension_mismatch,
                    "state, readout and axis dimensions differ");
    const CMatrix rho = readout.u * s.rho * readout.u.adjoint();
    const CMatrix drho = readout.u * (kI * (axis.jn * s.rho - s.rho * axis.jn)) * readout.u.adjoint();
    ProbDist d;
    d.p = rho.diagonal().real().cwiseMax(0.0);
    d.dp = drho.diagonal().real();
    return d;
}

inline ProbDist measurement_distribution(const QuantumState& s, const Unitary& readout, const PhaseAxis& axis) {
    return std::visit([&](const auto& x) { return measurement_distribution(x, readout, axis); }, s);
}

inline constexpr double kCfiEpsilon = 1e-12;

/// Sum of dp^2 / p. Empty outcomes with a non-negligible derivative are singular.
inline double cfi(const ProbDist& d) {
    detail::require(d.p.size() == d.dp.size(), ErrorCode::dimension_mismatch, "p and dp lengths differ");
    const double guard = std::sqrt(kCfiEpsilon);
    double total = 0.0;
    for (Index i = 0; i < d.p.size(); ++i) {
        if (d.p(i) > kCfiEpsilon) {
            total += d.dp(i) * d.dp(i) / d.p(i);
        } else if (std::abs(d.dp(i)) > guard) {
            throw Error(ErrorCode::ill_conditioned,
                        "outcome " + std::to_string(i) + " has p = " + std::to_string(d.p(i)) +
                            " but |dp| = " + std::to_string(std::abs(d.dp(i))));
        }
    }
    return total;
}

inline double qfi_pure(const PureState& s, const PhaseAxis& axis) {
    detail::require(s.dim() == axis.jn.rows(), ErrorCode::dimension_mismatch, "state and axis dimensions differ");
    const CVector jpsi = axis.jn * s.amplitudes;
    const double mean = s.amplitudes.dot(jpsi).real();
    return 4.0 * (jpsi.squaredNorm() - mean * mean);
}

/// SLD form: sum_ij 2 |<e_i|Jn|e_j>|^2 (l_i - l_j)^2 / (l_i + l_j).
inline double qfi_mixed(const MixedState& s, const PhaseAxis& axis) {
    detail::require(s.dim() == axis.jn.rows(), ErrorCode::dimension_mismatch, "state and axis dimensions differ");
    const HermitianEigen eig = hermitian_eigen(s.rho, 1e-9);
    const CMatrix jn_eig = eig.vectors.adjoint() * axis.jn * eig.vectors;
    double total = 0.0;
    for (Index i = 0; i < s.dim(); ++i) {
        for (Index k = 0; k < s.dim(); ++k) {
            const double sum = eig.values(i) + eig.values(k);
            if (sum <= kCfiEpsilon) continue;
            const double diff = eig.values(i) - eig.values(k);
            total += 2.0 * std::norm(jn_eig(i, k)) * diff * diff / sum;
        }
    }
    return total;
}

inline double qfi(const QuantumState& s, const PhaseAxis& axis) {
    if (const auto* pure = std::get_if<PureState>(&s)) return qfi_pure(*pure, axis);
    return qfi_mixed(std::get<MixedState>(s), axis);
}

inline double hellinger(const RVector& p, const RVector& q) {
    detail::require(p.size() == q.size(), ErrorCode::dimension_mismatch, "distribution lengths differ");
    double overlap = 0.0;
    for (Index i = 0; i < p.size(); ++i) overlap += std::sqrt(std::max(p(i), 0.0) * std::max(q(i), 0.0));
    return std::sqrt(std::clamp(1.0 - overlap, 0.0, 1.0));
}

inline double hellinger(const ProbDist& a, const ProbDist& b) { return hellinger(a.p, b.p); }

}  // namespace spinmetro
