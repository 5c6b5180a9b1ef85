#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sqvac/measurement.hpp"
#include "sqvac/squeezed.hpp"

using namespace sqvac;

namespace {

constexpr double kR06 = 0.11157177565710488;  // g/g_c = 0.6
constexpr double kR03 = 0.02357766986781032;  // g/g_c = 0.3

SqueezeParameter rabi(double r) { return SqueezeParameter::rabi_convention(r); }

double full_fidelity(const FockVector& a, const FockVector& b) {
    const std::size_t d = std::max(a.dim(), b.dim());
    return fidelity(a.resized(d), b.resized(d));
}

} // namespace

TEST(SqueezeParameterTest, RejectsNegativeMagnitude) {
    try {
        SqueezeParameter(-0.1, 0.0);
        FAIL() << "no throw";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    }
    EXPECT_THROW(SqueezeParameter(std::nan(""), 0.0), Error);
}

TEST(SqueezeParameterTest, FromReal) {
    const auto xi = SqueezeParameter::from_real(-kR06);
    EXPECT_DOUBLE_EQ(xi.r(), kR06);
    EXPECT_NEAR(xi.value().real(), -kR06, 1e-15);
    EXPECT_NEAR(xi.value().imag(), 0.0, 1e-15);
}

TEST(OperatorConstruction, ZeroIsVacuum) {
    const auto s = squeezed_vacuum_operator(SqueezeParameter(0.0, kPi), 8);
    EXPECT_EQ(s[0], complex(1.0));
    EXPECT_NEAR(s.norm(), 1.0, 1e-15);
}

TEST(OperatorConstruction, PhotonNumberAtSixTenths) {
    const auto s = squeezed_vacuum_operator(rabi(kR06));
    EXPECT_NEAR(s.mean_photon_number(), 0.0125, 1e-9);
}

TEST(OperatorConstruction, OddLevelsEmpty) {
    for (double r : {0.05, 0.5, 1.0}) {
        const auto s = squeezed_vacuum_operator(SqueezeParameter(r, 0.9));
        for (std::size_t n = 1; n < s.dim(); n += 2) EXPECT_LT(std::abs(s[n]), 1e-12);
    }
}

TEST(FockSeries, VacuumAndPairWeights) {
    const auto s = squeezed_vacuum_fock_series(rabi(kR06));
    EXPECT_NEAR(s.population(0), 4.0 * std::sqrt(5.0) / 9.0, 1e-12);  // 0.9938080
    EXPECT_NEAR(s.population(2), (1.0 / 162.0) * 4.0 * std::sqrt(5.0) / 9.0, 1e-12);  // 0.0061346
    EXPECT_NEAR(s.norm() * s.norm(), 1.0, 1e-10);
}

TEST(FockSeries, PairPopulationsSumToOne) {
    for (double r : {0.0, 0.3, 1.0, 2.0}) {
        const auto p = pair_populations(r);
        double sum = 0.0;
        for (double v : p) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-11) << r;
    }
}

TEST(WeakApprox, ZeroIsVacuum) {
    const auto s = weak_squeezing_approx(SqueezeParameter(0.0, kPi));
    EXPECT_NEAR(s.population(0), 1.0, 1e-15);
    EXPECT_NEAR(s.population(2), 0.0, 1e-15);
}

TEST(WeakApprox, PairCoefficient) {
    // (cosh r - 1)/cosh r with cosh r = 1.0062306
    EXPECT_NEAR(weak_squeezing_approx(rabi(kR06)).population(2), 0.006192010000093429, 1e-12);
    EXPECT_TRUE(weak_squeezing_valid(rabi(0.3)));
    EXPECT_FALSE(weak_squeezing_valid(rabi(0.6)));
}

TEST(WeakApprox, InfidelityBound) {
    for (double r : {0.01, 0.05, kR06, 0.2, 0.3}) {
        const double infid = 1.0 - full_fidelity(weak_squeezing_approx(rabi(r)), squeezed_vacuum_fock_series(rabi(r)));
        EXPECT_LT(infid, 0.4 * std::pow(std::tanh(r), 4)) << r;
    }
}

TEST(ThreeWay, ConstructionsAgree) {
    for (double r : {0.01, 0.05, kR06, 0.5, 1.0}) {
        for (double theta : {kPi, 0.0, 1.3}) {
            const SqueezeParameter xi(r, theta);
            const auto op = squeezed_vacuum_operator(xi);
            const auto series = squeezed_vacuum_fock_series(xi);
            EXPECT_GE(full_fidelity(op, series), 1.0 - 1e-10) << r << " " << theta;
            // amplitude-level agreement, phase included
            const std::size_t d = std::min(op.dim(), series.dim());
            EXPECT_LT((op.resized(d).amplitudes() - series.resized(d).amplitudes()).norm(), 1e-8);
            if (r < 0.1) {
                EXPECT_LT(1.0 - full_fidelity(weak_squeezing_approx(xi), op), 0.4 * std::pow(std::tanh(r), 4));
            }
        }
    }
}

TEST(PhotonNumber, ClosedForm) {
    EXPECT_EQ(photon_number(SqueezeParameter(0.0, kPi)), 0.0);
    EXPECT_NEAR(photon_number(rabi(kR06)), 0.0125, 1e-15);
    EXPECT_NEAR(photon_number(rabi(kR03)), 5.5600953e-4, 1e-10);
}

TEST(PhotonNumber, ConstructedStatesMatch) {
    for (double r : {kR03, kR06, 0.5, 1.0}) {
        const double target = std::sinh(r) * std::sinh(r);
        EXPECT_NEAR(squeezed_vacuum_operator(rabi(r)).mean_photon_number(), target, 1e-8) << r;
        EXPECT_NEAR(squeezed_vacuum_fock_series(rabi(r)).mean_photon_number(), target, 1e-8) << r;
    }
}

TEST(Variances, Vacuum) {
    for (double t : {0.0, 0.3, 2.0}) {
        const auto v = quadrature_variances(SqueezeParameter(0.0, kPi), 1.0, t);
        EXPECT_NEAR(v.var_x, 0.5, 1e-15);
        EXPECT_NEAR(v.var_p, 0.5, 1e-15);
    }
}

TEST(Variances, SixTenthsAtZeroAndQuarter) {
    const auto v0 = quadrature_variances(rabi(kR06), 1.0, 0.0);
    EXPECT_NEAR(v0.var_x, 0.625, 1e-14);
    EXPECT_NEAR(v0.var_p, 0.4, 1e-14);
    const auto v1 = quadrature_variances(rabi(kR06), 2.0, kPi / 4);
    EXPECT_NEAR(v1.var_x, 0.4, 1e-14);
    EXPECT_NEAR(v1.var_p, 0.625, 1e-14);
}

TEST(Variances, UncertaintyFloor) {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> ur(0.0, 2.0), uph(0.0, 2 * kPi), uth(0.0, 2 * kPi);
    for (int i = 0; i < 1000; ++i) {
        const auto v = quadrature_variances(SqueezeParameter(ur(gen), uth(gen)), 1.0, uph(gen));
        EXPECT_GE(v.product(), 0.25 - 1e-12);
        EXPECT_GT(v.var_x, 0.0);
        EXPECT_GT(v.var_p, 0.0);
    }
    for (double r : {0.1, 0.5, 1.5}) {
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(quadrature_variances(rabi(r), 1.0, k * kPi / 2).product(), 0.25, 1e-9);
        }
    }
}

TEST(Rotation, NumericMatchesClosedForm) {
    const double omega = 1.3;
    std::vector<double> times;
    for (int k = 0; k < 64; ++k) times.push_back(2 * kPi / omega * k / 63.0);
    for (double r : {kR06, 0.5}) {
        const auto frames = rotate_and_report(rabi(r), omega, times, GridSpec{}, Truncation{}, false);
        double n0 = frames.front().state.mean_photon_number();
        for (const auto& f : frames) {
            EXPECT_NEAR(f.numeric.var_x, f.analytic.var_x, 1e-8);
            EXPECT_NEAR(f.numeric.var_p, f.analytic.var_p, 1e-8);
            EXPECT_NEAR(f.state.mean_photon_number(), n0, 1e-10);
        }
    }
}

TEST(Rotation, PeriodAndRecurrence) {
    const double omega = 0.7;
    const auto xi = rabi(0.5);
    const auto frames =
        rotate_and_report(xi, omega, {0.0, 0.4, 0.4 + kPi / omega, 2 * kPi / omega}, GridSpec{}, Truncation{}, false);
    EXPECT_NEAR(frames[1].numeric.var_x, frames[2].numeric.var_x, 1e-10);
    EXPECT_GE(fidelity(frames[0].state, frames[3].state), 1.0 - 1e-9);
    EXPECT_NEAR(quadrature_variances(xi, omega, 0.3).var_x, quadrature_variances(xi, omega, 0.3 + kPi / omega).var_x,
                1e-12);
}

TEST(TwoTime, VacuumEqualTimes) {
    EXPECT_NEAR(symmetrized_two_time_correlation(SqueezeParameter(0.0, kPi), 1.0, 0.7, 0.7), 0.5, 1e-15);
}

TEST(TwoTime, VacuumIsStationary) {
    const SqueezeParameter vac(0.0, kPi);
    EXPECT_NEAR(symmetrized_two_time_correlation(vac, 1.0, 1.0, 0.2),
                symmetrized_two_time_correlation(vac, 1.0, 3.0, 2.2), 1e-15);
}

namespace {

struct TwoTimeGrid {
    std::vector<double> t1, t2;
};

TwoTimeGrid two_time_grid(double omega, int n) {
    TwoTimeGrid g;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            g.t1.push_back(2 * kPi / omega * i / n);
            g.t2.push_back(2 * kPi / omega * j / n);
        }
    }
    return g;
}

} // namespace

TEST(TwoTime, NonStationaryAmplitudeFromState) {
    const double omega = 1.0;
    const auto g = two_time_grid(omega, 12);
    for (double r : {0.0, 0.5}) {
        const auto m = quadrature_moments(squeezed_vacuum_operator(rabi(r)));
        std::vector<double> c, closed;
        for (std::size_t k = 0; k < g.t1.size(); ++k) {
            c.push_back(two_time_correlation_from_moments(m, omega, g.t1[k], g.t2[k]));
            closed.push_back(symmetrized_two_time_correlation(rabi(r), omega, g.t1[k], g.t2[k]));
            EXPECT_NEAR(c.back(), closed.back(), 1e-8);
        }
        const auto fit = fit_two_time_correlation(g.t1, g.t2, c, omega);
        EXPECT_NEAR(fit.nonstationary_amplitude(), std::sinh(2 * r) / 2, 1e-8);
        EXPECT_NEAR(fit.stationary, std::cosh(2 * r) / 2, 1e-8);
    }
    EXPECT_NEAR(std::sinh(1.0) / 2, 0.5876, 1e-4);
}

TEST(TwoTime, MonteCarloWithinSamplingError) {
    const double omega = 1.0;
    const auto g = two_time_grid(omega, 10);
    const auto mc = sample_two_time_correlation(rabi(0.5), omega, g.t1, g.t2, 1000000, 5);
    const auto fit = fit_two_time_correlation(g.t1, g.t2, mc, omega);
    EXPECT_NEAR(fit.nonstationary_amplitude(), std::sinh(1.0) / 2, 0.02 * std::sinh(1.0) / 2);
    const auto vac = sample_two_time_correlation(SqueezeParameter(0.0, kPi), omega, g.t1, g.t2, 1000000, 5);
    EXPECT_LT(fit_two_time_correlation(g.t1, g.t2, vac, omega).nonstationary_amplitude(), 5e-3);
}

TEST(TwoTime, FitNeedsSamples) {
    EXPECT_THROW(fit_two_time_correlation({0.0}, {0.0}, {0.5}, 1.0), Error);
}
