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

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spinmetro/noise.hpp"

namespace sm = spinmetro;

namespace {

// Random distribution with p > 0 everywhere and sum(dp) = 0.
sm::ProbDist random_dist(int n, std::mt19937& gen) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::normal_distribution<double> g;
    sm::ProbDist d{sm::RVector(n + 1), sm::RVector(n + 1)};
    for (int i = 0; i <= n; ++i) {
        d.p(i) = u(gen);
        d.dp(i) = g(gen);
    }
    d.p /= d.p.sum();
    d.dp.array() -= d.dp.mean();
    return d;
}

}  // namespace

TEST(Kernel, ZeroSigmaIsIdentity) {
    const auto k = sm::noise_kernel(12, 0.0);
    EXPECT_EQ((k.gamma - sm::RMatrix::Identity(13, 13)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Kernel, ColumnsStochastic) {
    for (double sigma : {0.0, 0.3, 3.0, 40.0}) {
        const auto k = sm::noise_kernel(20, sigma);
        EXPECT_GE(k.gamma.minCoeff(), 0.0);
        for (int j = 0; j <= 20; ++j) EXPECT_NEAR(k.gamma.col(j).sum(), 1.0, 1e-12) << sigma;
    }
}

TEST(Kernel, EntriesMatchGaussian) {
    const auto k = sm::noise_kernel(6, 1.7);
    for (int j = 0; j <= 6; ++j) {
        double norm = 0.0;
        for (int i = 0; i <= 6; ++i) norm += std::exp(-(i - j) * (i - j) / (2 * 1.7 * 1.7));
        for (int i = 0; i <= 6; ++i)
            EXPECT_NEAR(k.gamma(i, j), std::exp(-(i - j) * (i - j) / (2 * 1.7 * 1.7)) / norm, 1e-15);
    }
}

TEST(Kernel, FlatLimit) {
    const auto k = sm::noise_kernel(10, 1e6);
    EXPECT_LT((k.gamma.array() - 1.0 / 11.0).abs().maxCoeff(), 1e-6);
}

TEST(Kernel, NarrowKernelFlushesTinyEntries) {
    const auto k = sm::noise_kernel(1000, 1.0);
    EXPECT_EQ(k.gamma(1000, 0), 0.0);
    for (sm::Index j = 0; j <= 1000; j += 100) EXPECT_NEAR(k.gamma.col(j).sum(), 1.0, 1e-12);
    for (sm::Index i = 0; i <= 1000; ++i) {
        const double g = k.gamma(i, 500);
        EXPECT_TRUE(g == 0.0 || g >= 1e-300);
    }
}

TEST(Kernel, RejectsNegativeSigma) { EXPECT_THROW((void)sm::noise_kernel(4, -1.0), sm::Error); }

TEST(ApplyNoise, IdentityKernelUnchanged) {
    std::mt19937 gen(1);
    const auto d = random_dist(10, gen);
    const auto out = sm::apply_noise(d, sm::noise_kernel(10, 0.0));
    EXPECT_EQ((out.p - d.p).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApplyNoise, PreservesNormalization) {
    std::mt19937 gen(2);
    for (int k = 0; k < 50; ++k) {
        const auto d = random_dist(10, gen);
        const auto out = sm::apply_noise(d, sm::noise_kernel(10, 0.5 + 0.1 * k));
        EXPECT_NEAR(out.p.sum(), 1.0, 1e-12);
        EXPECT_NEAR(out.dp.sum(), 0.0, 1e-12);
    }
    EXPECT_THROW((void)sm::apply_noise(random_dist(4, gen), sm::noise_kernel(10, 1.0)), sm::Error);
}

TEST(ApplyNoise, ContractsFisherInformation) {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> s(0.1, 8.0);
    for (int k = 0; k < 1000; ++k) {
        const auto d = random_dist(10, gen);
        const double before = sm::cfi(d);
        EXPECT_LE(sm::cfi(sm::apply_noise(d, sm::noise_kernel(10, s(gen)))), before * (1.0 + 1e-12));
    }
}

TEST(Popt, Structure) {
    const auto d = sm::make_popt(10, 1.0);
    for (int i = 1; i < 10; ++i) {
        EXPECT_EQ(d.p(i), 0.0);
        EXPECT_EQ(d.dp(i), 0.0);
    }
    EXPECT_EQ(d.p(0), 0.5);
    EXPECT_EQ(d.p(10), 0.5);
    EXPECT_EQ(d.dp(10), 0.5);
    EXPECT_EQ(d.dp(0), -0.5);
    for (double f0 : {0.0, 1.0, 123.4, 1e4}) EXPECT_NEAR(sm::cfi(sm::make_popt(30, f0)), f0, 1e-12 * std::max(f0, 1.0));
}

TEST(Popt, NoisyValueFrozen) {
    const double value = sm::cfi(sm::apply_noise(sm::make_popt(10, 1.0), sm::noise_kernel(10, 4.0)));
    EXPECT_NEAR(value, 0.468455620785702, 1e-12);
    EXPECT_NEAR(sm::nqcrb_numeric(10, 1.0, 4.0), value, 1e-14);
}

TEST(Nqcrb, ZeroSigmaAndMonotone) {
    EXPECT_EQ(sm::nqcrb_numeric(100, 1e4, 0.0), 1e4);
    double prev = 1e4;
    for (double r : sm::default_sigma_over_n_grid()) {
        const double f = sm::nqcrb_numeric(100, 1e4, 100 * r);
        EXPECT_LE(f, prev * (1.0 + 1e-10));
        EXPECT_GE(f, 0.0);
        prev = f;
    }
    EXPECT_LT(prev / 1e4, 0.05);
}

TEST(Nqcrb, LargeSystemWithoutMatrices) {
    const double f = sm::nqcrb_numeric(1000, 1e6, 10.0);
    EXPECT_GT(f, 0.9e6);
    EXPECT_LE(f, 1e6);
}

TEST(Analytic, Limits) {
    EXPECT_EQ(sm::nqcrb_analytic(100, 50.0, 0.0), 50.0);
    EXPECT_NEAR(sm::nqcrb_analytic(100, 50.0, 1e-3), 50.0, 1e-12);
    EXPECT_LT(sm::nqcrb_analytic(100, 50.0, 1e6), 1e-12);
    EXPECT_EQ(sm::nqcrb_analytic(100, 50.0, std::numeric_limits<double>::infinity()), 0.0);
}

TEST(Analytic, AgainstQuadratureErf) {
    for (double ratio : {0.02, 0.1, 0.3, 0.7, 1.0}) {
        const double sigma = 100 * ratio;
        const double alpha = 100 / (std::sqrt(2.0) * sigma);
        const double factor = 1.0 - 2.0 * oracle::erf_quad(alpha / 2) / oracle::erf_quad(alpha);
        EXPECT_NEAR(sm::nqcrb_analytic(100, 1.0, sigma), factor * factor, 1e-9) << ratio;
    }
}

TEST(Analytic, UnderestimatesNumeric) {
    for (double r : sm::default_sigma_over_n_grid()) {
        EXPECT_LE(sm::nqcrb_analytic(100, 1e4, 100 * r), sm::nqcrb_numeric(100, 1e4, 100 * r) + 1e-9 * 1e4) << r;
    }
}

TEST(Analytic, AlphaGrowsWithoutOverflow) {
    const double f = sm::nqcrb_analytic(1000, 1.0, 1e-6);
    EXPECT_TRUE(std::isfinite(f));
    EXPECT_NEAR(f, 1.0, 1e-15);
}

TEST(TwoPoint, OracleValue) {
    const double e = oracle::erf_quad(1.0 / std::sqrt(2.0));
    EXPECT_NEAR(sm::two_point_cfi(1.0, -5.0, 5.0, 5.0), e * e, 1e-10);
    EXPECT_NEAR(sm::two_point_cfi(1.0, -5.0, 5.0, 5.0), 0.46606, 1e-5);
}

TEST(TwoPoint, LimitsAndErrors) {
    EXPECT_EQ(sm::two_point_cfi(3.0, 0.0, 1.0, 0.0), 3.0);
    EXPECT_NEAR(sm::two_point_cfi(3.0, 0.0, 1.0, 1e-4), 3.0, 1e-12);
    try {
        (void)sm::two_point_cfi(1.0, 2.0, 2.0, 1.0);
        FAIL() << "expected an error";
    } catch (const sm::Error& e) {
        EXPECT_EQ(e.code(), sm::ErrorCode::invalid_argument);
    }
}

TEST(TwoPoint, ExceedsTruncatedDomainBound) {
    const double n = 100, sigma = n / 4;
    EXPECT_GE(sm::two_point_cfi(1.0, -n / 2, n / 2, sigma), sm::nqcrb_analytic(100, 1.0, sigma));
}

TEST(Grid, DefaultSigmaGrid) {
    const auto g = sm::default_sigma_over_n_grid();
    ASSERT_EQ(g.size(), 50u);
    EXPECT_DOUBLE_EQ(g.front(), 1e-2);
    EXPECT_DOUBLE_EQ(g.back(), 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
}

TEST(Nqcrb, ResultEchoesInputs) {
    const auto r = sm::nqcrb(100, 1e4, 7.0);
    EXPECT_EQ(r.n_particles, 100);
    EXPECT_EQ(r.sigma, 7.0);
    EXPECT_EQ(r.f_q, 1e4);
    EXPECT_LE(r.f_numeric, r.f_q);
    EXPECT_LE(r.f_analytic, r.f_q);
    EXPECT_GE(r.f_analytic, 0.0);
}
