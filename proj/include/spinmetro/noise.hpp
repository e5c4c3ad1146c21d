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

// Gaussian detection noise and the noisy quantum Cramer-Rao bound.

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "spinmetro/metrology.hpp"

namespace spinmetro {

/// Column-stochastic confusion matrix: gamma(m, m') = P(read m | true m').
struct NoiseKernel {
    double sigma = 0.0;
    RMatrix gamma;

    [[nodiscard]] Index dim() const noexcept { return gamma.rows(); }
};

/// Column m' of the kernel, computed without building the matrix.
inline RVector kernel_column(int n_particles, double sigma, Index true_index) {
    detail::require(n_particles >= 1, ErrorCode::invalid_dimension, "kernel needs N >= 1");
    detail::require(std::isfinite(sigma) && sigma >= 0.0, ErrorCode::invalid_argument,
                    "noise sigma must be finite and >= 0");
    const Index d = n_particles + 1;
    detail::require(true_index >= 0 && true_index < d, ErrorCode::invalid_argument, "kernel column out of range");
    RVector col = RVector::Zero(d);
    if (sigma == 0.0) {
        col(true_index) = 1.0;
        return col;
    }
    const bool clamp = sigma < n_particles / 20.0;
    for (Index i = 0; i < d; ++i) {
        const double diff = static_cast<double>(i - true_index);
        const double g = std::exp(-diff * diff / (2.0 * sigma * sigma));
        col(i) = (clamp && g < 1e-300) ? 0.0 : g;
    }
    col /= col.sum();
    return col;
}

inline NoiseKernel noise_kernel(int n_particles, double sigma) {
    NoiseKernel k;
    k.sigma = sigma;
    const Index d = n_particles + 1;
    k.gamma.resize(d, d);
    for (Index j = 0; j < d; ++j) k.gamma.col(j) = kernel_column(n_particles, sigma, j);
    return k;
}

inline ProbDist apply_noise(const ProbDist& d, const NoiseKernel& k) {
    detail::require(d.p.size() == k.dim() && d.dp.size() == k.dim(), ErrorCode::dimension_mismatch,
                    "distribution and kernel dimensions differ");
    if (k.sigma == 0.0) return d;
    return ProbDist{k.gamma * d.p, k.gamma * d.dp};
}

/// Half the weight on each extreme outcome, carrying Fisher information f0.
inline ProbDist make_popt(int n_particles, double f0) {
    detail::require(n_particles >= 1, ErrorCode::invalid_dimension, "P_opt needs N >= 1");
    detail::require(std::isfinite(f0) && f0 >= 0.0, ErrorCode::invalid_argument, "f0 must be finite and >= 0");
    const Index d = n_particles + 1;
    ProbDist out{RVector::Zero(d), RVector::Zero(d)};
    out.p(0) = 0.5;
    out.p(d - 1) = 0.5;
    out.dp(0) = -0.5 * std::sqrt(f0);
    out.dp(d - 1) = 0.5 * std::sqrt(f0);
    return out;
}

/// CFI of P_opt after noise, using only the two kernel columns it touches.
inline double nqcrb_numeric(int n_particles, double f_q, double sigma) {
    detail::require(std::isfinite(f_q) && f_q >= 0.0, ErrorCode::invalid_argument, "f_q must be finite and >= 0");
    if (sigma == 0.0) return f_q;
    const RVector low = kernel_column(n_particles, sigma, 0);
    const RVector high = kernel_column(n_particles, sigma, n_particles);
    const double root = std::sqrt(f_q);
    return cfi(ProbDist{0.5 * (low + high), 0.5 * root * (high - low)});
}

/// F_Q (1 - 2 erf(a/2) / erf(a))^2 with a = N / (sqrt(2) sigma).
inline double nqcrb_analytic(int n_particles, double f_q, double sigma) {
    detail::require(n_particles >= 1, ErrorCode::invalid_dimension, "NQCRB needs N >= 1");
    detail::require(std::isfinite(f_q) && f_q >= 0.0, ErrorCode::invalid_argument, "f_q must be finite and >= 0");
    detail::require(sigma >= 0.0 && !std::isnan(sigma), ErrorCode::invalid_argument, "sigma must be >= 0");
    if (sigma == 0.0) return f_q;
    const double alpha = n_particles / (std::numbers::sqrt2 * sigma);
    if (alpha == 0.0) return 0.0;
    double factor;
    if (alpha > 2.0) {
        // 1 - 2 erf(a/2)/erf(a) = (2 erfc(a/2) - erfc(a) - 1) / erf(a)
        factor = (2.0 * std::erfc(0.5 * alpha) - std::erfc(alpha) - 1.0) / std::erf(alpha);
    } else {
        factor = 1.0 - 2.0 * std::erf(0.5 * alpha) / std::erf(alpha);
    }
    return f_q * factor * factor;
}

/// Continuous two-outcome CFI at P_a = 1/2: f0 erf((b - a) / (2 sqrt(2) sigma))^2.
inline double two_point_cfi(double f0, double a, double b, double sigma) {
    detail::require(a != b, ErrorCode::invalid_argument, "two-point outcomes must differ");
    detail::require(sigma >= 0.0 && !std::isnan(sigma), ErrorCode::invalid_argument, "sigma must be >= 0");
    if (sigma == 0.0) return f0;
    const double e = std::erf(std::abs(b - a) / (2.0 * std::numbers::sqrt2 * sigma));
    return f0 * e * e;
}

struct NqcrbResult {
    int n_particles = 0;
    double sigma = 0.0;
    double f_q = 0.0;
    double f_numeric = 0.0;
    double f_analytic = 0.0;
};

inline NqcrbResult nqcrb(int n_particles, double f_q, double sigma) {
    return NqcrbResult{n_particles, sigma, f_q, nqcrb_numeric(n_particles, f_q, sigma),
                       nqcrb_analytic(n_particles, f_q, sigma)};
}

/// Logarithmic sigma/N grid on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int points) {
    detail::require(lo > 0.0 && hi >= lo && points >= 1, ErrorCode::invalid_argument, "bad log grid");
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = lo;
        return out;
    }
    const double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) out[i] = lo * std::exp(step * i);
    out.back() = hi;
    return out;
}

inline std::vector<double> default_sigma_over_n_grid() { return log_grid(1e-2, 1.0, 50); }

}  // namespace spinmetro
