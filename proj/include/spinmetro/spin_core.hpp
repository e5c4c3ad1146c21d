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

// Dense linear algebra on the symmetric (j = N/2) subspace of N two-mode
// particles. Basis index i in {0..N} is the Jz eigenstate with m = i - N/2,
// ascending in m. Every other header inherits this ordering.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "spinmetro/errors.hpp"

namespace spinmetro {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

/// Collective angular-momentum matrices for N particles.
struct SpinOps {
    int n_particles = 0;
    CMatrix jx;
    CMatrix jy;
    CMatrix jz;

    [[nodiscard]] Index dim() const noexcept { return n_particles + 1; }

    /// Jz eigenvalue of basis index i.
    [[nodiscard]] double m(Index i) const noexcept {
        return static_cast<double>(i) - 0.5 * n_particles;
    }

    /// Basis index of eigenvalue m; m must be one of -N/2, -N/2+1, ..., N/2.
    [[nodiscard]] Index index_of(double m_value) const {
        const double shifted = m_value + 0.5 * n_particles;
        const double rounded = std::round(shifted);
        detail::require(std::abs(shifted - rounded) < 1e-9 && rounded >= 0 && rounded <= n_particles,
                        ErrorCode::invalid_argument,
                        "m = " + std::to_string(m_value) + " is not an outcome for N = " +
                            std::to_string(n_particles));
        return static_cast<Index>(rounded);
    }
};

inline SpinOps build_spin_ops(int n_particles) {
    detail::require(n_particles >= 1, ErrorCode::invalid_dimension,
                    "number of particles must be >= 1, got " + std::to_string(n_particles));
    SpinOps ops;
    ops.n_particles = n_particles;
    const Index dim = n_particles + 1;
    const double j = 0.5 * n_particles;

    // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>
    CMatrix raise = CMatrix::Zero(dim, dim);
    for (Index i = 0; i + 1 < dim; ++i) {
        const double m = ops.m(i);
        raise(i + 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    const CMatrix lower = raise.adjoint();
    ops.jx = 0.5 * (raise + lower);
    ops.jy = (raise - lower) / (2.0 * kI);
    ops.jz = CMatrix::Zero(dim, dim);
    for (Index i = 0; i < dim; ++i) ops.jz(i, i) = ops.m(i);
    return ops;
}

struct Unitary {
    CMatrix u;

    [[nodiscard]] Index dim() const noexcept { return u.rows(); }
    [[nodiscard]] Unitary adjoint() const { return Unitary{u.adjoint()}; }

    static Unitary identity(Index dim) { return Unitary{CMatrix::Identity(dim, dim)}; }
};

inline Unitary operator*(const Unitary& a, const Unitary& b) {
    detail::require(a.dim() == b.dim(), ErrorCode::dimension_mismatch,
                    "cannot compose unitaries of dimension " + std::to_string(a.dim()) + " and " +
                        std::to_string(b.dim()));
    return Unitary{a.u * b.u};
}

struct PureState {
    CVector amplitudes;

    [[nodiscard]] Index dim() const noexcept { return amplitudes.size(); }
};

struct MixedState {
    CMatrix rho;

    [[nodiscard]] Index dim() const noexcept { return rho.rows(); }
};

using QuantumState = std::variant<PureState, MixedState>;

inline Index dim(const QuantumState& s) {
    return std::visit([](const auto& x) { return x.dim(); }, s);
}

/// Largest elementwise deviation from Hermiticity.
inline double hermiticity_error(const CMatrix& h) {
    if (h.size() == 0) return 0.0;
    return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

inline double unitarity_error(const Unitary& u) {
    const CMatrix gram = u.u.adjoint() * u.u;
    return (gram - CMatrix::Identity(u.dim(), u.dim())).cwiseAbs().maxCoeff();
}

inline void validate(const PureState& s, double tol = 1e-12) {
    detail::require(s.dim() >= 2, ErrorCode::invalid_dimension, "state dimension must be >= 2");
    detail::require(std::abs(s.amplitudes.squaredNorm() - 1.0) <= tol, ErrorCode::invalid_argument,
                    "pure state is not normalized");
}

inline void validate(const MixedState& s, double tol = 1e-12) {
    detail::require(s.rho.rows() == s.rho.cols() && s.dim() >= 2, ErrorCode::invalid_dimension,
                    "density matrix must be square with dimension >= 2");
    detail::require(hermiticity_error(s.rho) <= tol, ErrorCode::non_hermitian,
                    "density matrix is not Hermitian");
    detail::require(std::abs(s.rho.trace().real() - 1.0) <= tol, ErrorCode::invalid_argument,
                    "density matrix trace differs from 1");
    const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(s.rho).eigenvalues();
    detail::require(ev.minCoeff() >= -1e-10, ErrorCode::invalid_argument,
                    "density matrix has a negative eigenvalue");
}

/// Eigendecomposition h = V diag(values) V^dagger of a Hermitian matrix.
/// Purely real input (Jx, Jz^2, Jy^2, ...) takes the real symmetric solver.
struct HermitianEigen {
    RVector values;
    CMatrix vectors;
};

inline HermitianEigen hermitian_eigen(const CMatrix& h, double tol = 1e-10) {
    detail::require(h.rows() == h.cols(), ErrorCode::dimension_mismatch, "generator must be square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    detail::require(hermiticity_error(h) <= tol * scale, ErrorCode::non_hermitian,
                    "generator is not Hermitian within tolerance");
    HermitianEigen out;
    if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
        const RMatrix sym = 0.5 * (h.real() + h.real().transpose());
        Eigen::SelfAdjointEigenSolver<RMatrix> es(sym);
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors().cast<Complex>();
    } else {
        const CMatrix sym = 0.5 * (h + h.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors();
    }
    return out;
}

/// exp(i * scale * h) for a fixed Hermitian h and many scales.
class HermitianExponential {
public:
    explicit HermitianExponential(const CMatrix& h) : eig_(hermitian_eigen(h)) {}

    [[nodiscard]] Unitary at(double scale) const {
        const CVector phases = phase_factors(scale);
        return Unitary{eig_.vectors * phases.asDiagonal() * eig_.vectors.adjoint()};
    }

    /// exp(i * scale * h) |v> without forming the matrix.
    [[nodiscard]] CVector apply(double scale, const CVector& v) const {
        const CVector coeffs = eig_.vectors.adjoint() * v;
        return eig_.vectors * phase_factors(scale).cwiseProduct(coeffs);
    }

    [[nodiscard]] const HermitianEigen& eigen() const noexcept { return eig_; }

private:
    [[nodiscard]] CVector phase_factors(double scale) const {
        CVector phases(eig_.values.size());
        for (Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(kI * (scale * eig_.values(k)));
        return phases;
    }

    HermitianEigen eig_;
};

inline Unitary expm_generator(const CMatrix& h, double scale) {
    return HermitianExponential(h).at(scale);
}

inline PureState apply(const Unitary& u, const PureState& s) {
    detail::require(u.dim() == s.dim(), ErrorCode::dimension_mismatch,
                    "unitary and state dimensions differ");
    return PureState{u.u * s.amplitudes};
}

inline MixedState apply(const Unitary& u, const MixedState& s) {
    detail::require(u.dim() == s.dim(), ErrorCode::dimension_mismatch,
                    "unitary and state dimensions differ");
    return MixedState{u.u * s.rho * u.u.adjoint()};
}

inline QuantumState apply(const Unitary& u, const QuantumState& s) {
    return std::visit([&u](const auto& x) -> QuantumState { return apply(u, x); }, s);
}

inline PureState basis_state(Index dim, Index index) {
    detail::require(index >= 0 && index < dim, ErrorCode::invalid_argument, "basis index out of range");
    PureState s{CVector::Zero(dim)};
    s.amplitudes(index) = 1.0;
    return s;
}

/// |N/2>, the fully polarized starting state of every preparation.
inline PureState top_state(const SpinOps& ops) { return basis_state(ops.dim(), ops.dim() - 1); }

inline CMatrix density_matrix(const QuantumState& s) {
    if (const auto* pure = std::get_if<PureState>(&s)) {
        return pure->amplitudes * pure->amplitudes.adjoint();
    }
    return std::get<MixedState>(s).rho;
}

inline double expectation(const PureState& s, const CMatrix& op) {
    return s.amplitudes.dot(op * s.amplitudes).real();
}

inline double expectation(const MixedState& s, const CMatrix& op) {
    return (s.rho * op).trace().real();
}

inline double expectation(const QuantumState& s, const CMatrix& op) {
    return std::visit([&op](const auto& x) { return expectation(x, op); }, s);
}

inline double purity(const QuantumState& s) {
    const CMatrix rho = density_matrix(s);
    return (rho * rho).trace().real();
}

/// Husimi Q on a (theta, phi) grid. theta spans [0, pi] inclusive, phi spans
/// [0, 2 pi) with periodic spacing. q is row-major: q[i * n_phi + j].
struct HusimiField {
    int n_theta = 0;
    int n_phi = 0;
    std::vector<double> theta;
    std::vector<double> phi;
    std::vector<double> q;

    [[nodiscard]] double at(int i, int j) const { return q[static_cast<std::size_t>(i) * n_phi + j]; }
};

inline HusimiField husimi_q(const QuantumState& s, const SpinOps& ops, int n_theta, int n_phi) {
    detail::require(n_theta >= 2 && n_phi >= 2, ErrorCode::invalid_argument,
                    "Husimi grid needs at least 2 points per axis");
    detail::require(dim(s) == ops.dim(), ErrorCode::dimension_mismatch,
                    "state dimension does not match spin operators");
    const Index d = ops.dim();
    const double prefactor = static_cast<double>(d) / (4.0 * std::numbers::pi);

    HusimiField field;
    field.n_theta = n_theta;
    field.n_phi = n_phi;
    field.theta.resize(n_theta);
    field.phi.resize(n_phi);
    field.q.resize(static_cast<std::size_t>(n_theta) * n_phi);
    for (int i = 0; i < n_theta; ++i) field.theta[i] = std::numbers::pi * i / (n_theta - 1);
    for (int j = 0; j < n_phi; ++j) field.phi[j] = 2.0 * std::numbers::pi * j / n_phi;

    const HermitianExponential rot_y(ops.jy);
    const CVector top = top_state(ops).amplitudes;
    const auto* pure = std::get_if<PureState>(&s);
    const CMatrix rho = pure ? CMatrix() : std::get<MixedState>(s).rho;

    for (int i = 0; i < n_theta; ++i) {
        const CVector polar = rot_y.apply(field.theta[i], top);
        for (int j = 0; j < n_phi; ++j) {
            // |theta, phi> = exp(i phi Jz) exp(i theta Jy) |N/2>
            CVector coherent(d);
            for (Index k = 0; k < d; ++k) coherent(k) = std::exp(kI * (field.phi[j] * ops.m(k))) * polar(k);
            double value;
            if (pure) {
                value = std::norm(coherent.dot(pure->amplitudes));
            } else {
                value = coherent.dot(rho * coherent).real();
            }
            field.q[static_cast<std::size_t>(i) * n_phi + j] = prefactor * std::max(value, 0.0);
        }
    }
    return field;
}

/// Integral of Q over the sphere: trapezoid in theta (with sin theta), periodic rectangle in phi.
inline double husimi_integral(const HusimiField& f) {
    const double dtheta = std::numbers::pi / (f.n_theta - 1);
    const double dphi = 2.0 * std::numbers::pi / f.n_phi;
    double total = 0.0;
    for (int i = 0; i < f.n_theta; ++i) {
        const double w = (i == 0 || i == f.n_theta - 1) ? 0.5 : 1.0;
        double row = 0.0;
        for (int j = 0; j < f.n_phi; ++j) row += f.at(i, j);
        total += w * std::sin(f.theta[i]) * row;
    }
    return total * dtheta * dphi;
}

}  // namespace spinmetro
