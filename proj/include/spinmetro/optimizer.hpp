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

// Stochastic search over distributions of fixed noise-free Fisher information.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "spinmetro/noise.hpp"
#include "spinmetro/parallel.hpp"

namespace spinmetro {

/// mt19937_64 with explicit uniform and normal transforms, so draws are
/// identical on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    RVector normal_vector(Index n) {
        RVector out(n);
        for (Index i = 0; i < n; ++i) out(i) = normal();
        return out;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// v = sqrt(p), vdot = dp / (2 sqrt(p)); F_C(0) = 4 vdot.vdot.
struct AmplitudePair {
    RVector v;
    RVector vdot;

    [[nodiscard]] double f_zero() const { return 4.0 * vdot.squaredNorm(); }
};

inline AmplitudePair pair_from_dist(const ProbDist& d) {
    validate(d);
    const double guard = std::sqrt(kCfiEpsilon);
    AmplitudePair out{RVector::Zero(d.size()), RVector::Zero(d.size())};
    for (Index i = 0; i < d.size(); ++i) {
        if (d.p(i) > kCfiEpsilon) {
            out.v(i) = std::sqrt(d.p(i));
            out.vdot(i) = d.dp(i) / (2.0 * out.v(i));
        } else {
            detail::require(std::abs(d.dp(i)) <= guard, ErrorCode::ill_conditioned,
                            "outcome " + std::to_string(i) + " has vanishing p but non-zero dp");
            out.v(i) = std::sqrt(std::max(d.p(i), 0.0));
        }
    }
    return out;
}

inline ProbDist dist_from_pair(const AmplitudePair& pair) {
    return ProbDist{pair.v.cwiseAbs2(), 2.0 * pair.v.cwiseProduct(pair.vdot)};
}

/// Rotates v and vdot by the same angle, uniform in (0, max_angle], in a random plane.
inline AmplitudePair random_plane_rotation(const AmplitudePair& pair, double max_angle, Rng& rng) {
    detail::require(std::isfinite(max_angle) && max_angle >= 0.0, ErrorCode::invalid_argument,
                    "max_angle must be finite and >= 0");
    const Index n = pair.v.size();
    detail::require(n >= 2 && pair.vdot.size() == n, ErrorCode::dimension_mismatch,
                    "rotation needs two equal-length vectors of size >= 2");
    RVector e1 = rng.normal_vector(n);
    RVector e2 = rng.normal_vector(n);
    const double angle = max_angle * (1.0 - rng.uniform());
    if (angle == 0.0) return pair;
    e1.normalize();
    for (int pass = 0; pass < 2; ++pass) e2 -= e1.dot(e2) * e1;
    e2.normalize();

    const double c = std::cos(angle) - 1.0;
    const double s = std::sin(angle);
    auto rotate = [&](const RVector& x) -> RVector {
        const double a = e1.dot(x);
        const double b = e2.dot(x);
        return x + e1 * (c * a - s * b) + e2 * (s * a + c * b);
    };
    return AmplitudePair{rotate(pair.v), rotate(pair.vdot)};
}

inline AmplitudePair random_plane_rotation(const AmplitudePair& pair, double max_angle, std::uint64_t seed) {
    Rng rng(seed);
    return random_plane_rotation(pair, max_angle, rng);
}

struct OptTrace {
    long iteration = 0;
    double f_sigma = 0.0;
    double f_zero = 0.0;
    double d_h_to_popt = 0.0;
};

struct HillClimbResult {
    ProbDist best;
    double f_sigma = 0.0;
    long accepted = 0;
    std::vector<OptTrace> trace;
};

struct HillClimbOptions {
    long iterations = 100000;
    double max_angle = 0.1;
    std::uint64_t seed = 1;
    long trace_stride = 100;
};

/// Accepts a random plane rotation only if the noisy CFI strictly increases.
/// The trace starts at iteration 0 and always ends at the last iteration.
inline HillClimbResult hill_climb(const ProbDist& start, double sigma, const HillClimbOptions& opt) {
    detail::require(opt.iterations >= 1, ErrorCode::invalid_argument, "hill climb needs iterations >= 1");
    detail::require(opt.trace_stride >= 1, ErrorCode::invalid_argument, "trace stride must be >= 1");
    const int n = static_cast<int>(start.size()) - 1;
    detail::require(n >= 1, ErrorCode::invalid_dimension, "distribution needs at least two outcomes");
    const NoiseKernel kernel = noise_kernel(n, sigma);
    const RVector popt = make_popt(n, 0.0).p;
    Rng rng(opt.seed);

    AmplitudePair current = pair_from_dist(start);
    HillClimbResult out;
    out.best = dist_from_pair(current);
    out.f_sigma = cfi(apply_noise(out.best, kernel));
    auto record = [&](long it) {
        out.trace.push_back(OptTrace{it, out.f_sigma, current.f_zero(), hellinger(out.best.p, popt)});
    };
    record(0);
    for (long it = 1; it <= opt.iterations; ++it) {
        AmplitudePair candidate = random_plane_rotation(current, opt.max_angle, rng);
        ProbDist dist = dist_from_pair(candidate);
        const double f = cfi(apply_noise(dist, kernel));
        if (f > out.f_sigma) {
            current = std::move(candidate);
            out.best = std::move(dist);
            out.f_sigma = f;
            ++out.accepted;
        }
        if (it % opt.trace_stride == 0 || it == opt.iterations) record(it);
    }
    return out;
}

/// Orthonormalized Gaussian matrix with the QR sign ambiguity removed.
inline RMatrix random_orthogonal(Index n, Rng& rng) {
    RMatrix g(n, n);
    for (Index j = 0; j < n; ++j) g.col(j) = rng.normal_vector(n);
    const Eigen::HouseholderQR<RMatrix> qr(g);
    RMatrix q = qr.householderQ();
    const RMatrix r = qr.matrixQR();
    for (Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

/// P_opt(N, f0) pushed through a random orthogonal map of its amplitude pair.
inline ProbDist random_constrained_dist(int n_particles, double f0, std::uint64_t seed) {
    const AmplitudePair base = pair_from_dist(make_popt(n_particles, f0));
    Rng rng(seed);
    const RMatrix o = random_orthogonal(base.v.size(), rng);
    return dist_from_pair(AmplitudePair{o * base.v, o * base.vdot});
}

namespace starts {

/// Uniform p with dp proportional to m.
inline ProbDist uniform_spread(int n_particles, double f0) {
    const Index d = n_particles + 1;
    RVector m(d);
    for (Index i = 0; i < d; ++i) m(i) = static_cast<double>(i) - 0.5 * n_particles;
    const double scale = std::sqrt(f0 * d / m.squaredNorm());
    return ProbDist{RVector::Constant(d, 1.0 / d), m * (scale / d)};
}

/// Half the weight on each of two outcomes i < k, carrying f0.
inline ProbDist pair_at(int n_particles, Index i, Index k, double f0) {
    const Index d = n_particles + 1;
    detail::require(i >= 0 && k < d && i < k, ErrorCode::invalid_argument, "pair outcomes out of range");
    ProbDist out{RVector::Zero(d), RVector::Zero(d)};
    out.p(i) = 0.5;
    out.p(k) = 0.5;
    out.dp(i) = -0.5 * std::sqrt(f0);
    out.dp(k) = 0.5 * std::sqrt(f0);
    return out;
}

inline ProbDist adjacent_pair(int n_particles, double f0) {
    const Index mid = n_particles / 2;
    return pair_at(n_particles, mid, mid + 1, f0);
}

inline ProbDist mid_spectrum_pair(int n_particles, double f0) {
    const Index q = n_particles / 4;
    return pair_at(n_particles, q, n_particles - q, f0);
}

}  // namespace starts

struct CertRow {
    std::uint64_t seed = 0;
    double f_sigma = 0.0;
    double bound = 0.0;
};

/// Noisy CFI of `count` random constrained distributions, seeds first_seed + i.
inline std::vector<CertRow> certify_bound(int n_particles, double sigma, double f0, long count,
                                          std::uint64_t first_seed, int threads = 1) {
    detail::require(count >= 1, ErrorCode::invalid_argument, "certification needs count >= 1");
    const NoiseKernel kernel = noise_kernel(n_particles, sigma);
    const double bound = nqcrb_numeric(n_particles, f0, sigma);
    std::vector<CertRow> rows(static_cast<std::size_t>(count));
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const std::uint64_t seed = first_seed + i;
        rows[i] = CertRow{seed, cfi(apply_noise(random_constrained_dist(n_particles, f0, seed), kernel)), bound};
    });
    return rows;
}

}  // namespace spinmetro
