#include <cmath>

#include <gtest/gtest.h>

#include "sqvac/quench.hpp"

using namespace sqvac;

namespace {

std::vector<double> period_grid(double omega, std::size_t n, double periods = 2.0) {
    std::vector<double> t;
    for (std::size_t k = 0; k < n; ++k) t.push_back(periods * 2 * kPi / omega * k / (n - 1.0));
    return t;
}

} // namespace

TEST(Quench, DecoupledStaysEmpty) {
    const auto res = run_quench(RabiParams(1.0, 100.0, 0.0), period_grid(1.0, 20), QuenchSource::Effective);
    for (const auto& s : res.trace) EXPECT_NEAR(s.mean_n, 0.0, 1e-15);
    const auto exact = run_quench(RabiParams(1.0, 100.0, 0.0), period_grid(1.0, 20), QuenchSource::Exact);
    for (const auto& s : exact.trace) EXPECT_NEAR(s.mean_n, 0.0, 1e-12);
}

TEST(Quench, EffectiveSourceConservesPhotons) {
    const auto p = RabiParams::from_ratio(1.0, 100.0, 0.6);
    const auto res = run_quench(p, period_grid(1.0, 100), QuenchSource::Effective);
    EXPECT_NEAR(res.pre_quench_n, 0.0125, 1e-8);
    for (const auto& s : res.trace) {
        EXPECT_NEAR(s.mean_n, res.pre_quench_n, 1e-10);
        EXPECT_NEAR(s.mean_n, 0.0125, 1e-8);
        EXPECT_NEAR(s.purity, 1.0, 1e-10);
    }
}

TEST(Quench, VarianceTraceFollowsClosedForm) {
    const double omega = 2.0;
    const auto res = run_quench(RabiParams::from_ratio(omega, 150.0, 0.6), period_grid(omega, 64), QuenchSource::Effective);
    for (const auto& s : res.trace) {
        EXPECT_NEAR(s.variances.var_x, s.analytic.var_x, 1e-8);
        EXPECT_NEAR(s.variances.var_p, s.analytic.var_p, 1e-8);
    }
    // period pi/omega
    const auto shifted = run_quench(RabiParams::from_ratio(omega, 150.0, 0.6), {0.37, 0.37 + kPi / omega},
                                    QuenchSource::Effective);
    EXPECT_NEAR(shifted.trace[0].variances.var_x, shifted.trace[1].variances.var_x, 1e-10);
}

TEST(Quench, ExactSourceConservesPhotons) {
    const auto p = RabiParams::from_ratio(1.0, 100.0, 0.3);
    const auto res = run_quench(p, period_grid(1.0, 50), QuenchSource::Exact);
    EXPECT_GE(res.pre_quench_n, 0.0);
    for (const auto& s : res.trace) EXPECT_NEAR(s.mean_n, res.pre_quench_n, 1e-10);
}

TEST(Quench, BeyondCriticalRejected) {
    try {
        run_quench(RabiParams::from_ratio(1.0, 100.0, 1.0), {0.0}, QuenchSource::Effective);
        FAIL() << "no throw";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BeyondCritical);
    }
}

TEST(Ramp, TooFewSteps) {
    try {
        adiabatic_reference(RabiParams::from_ratio(1.0, 100.0, 0.6), 10.0, 9);
        FAIL() << "no throw";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ResolutionError);
    }
}

TEST(Ramp, InstantaneousMatchesSudden) {
    const auto p = RabiParams::from_ratio(1.0, 100.0, 0.6);
    const auto ramp = adiabatic_reference(p, 1e-9, 10);
    const auto sudden = run_quench(p, {0.0}, QuenchSource::Effective);
    EXPECT_NEAR(ramp.final_n, sudden.trace[0].mean_n, 1e-6);
}

TEST(Ramp, MonotoneInDuration) {
    const auto p = RabiParams::from_ratio(1.0, 100.0, 0.6);
    double previous = 1.0;
    for (double d : {1.0, 10.0, 100.0}) {
        const double n = adiabatic_reference(p, d, 2000).final_n;
        EXPECT_LE(n, previous) << d;
        previous = n;
    }
}

TEST(Ramp, SlowRampSuppressesPhotons) {
    const auto p = RabiParams::from_ratio(1.0, 100.0, 0.6);
    const auto ramp = adiabatic_reference(p, 1000.0, 10000);
    EXPECT_LT(ramp.final_n, 0.1 * 0.0125);
    // halving the step changes the answer by under 1%
    const auto fine = adiabatic_reference(p, 1000.0, 20000);
    EXPECT_LT(std::abs(ramp.final_n - fine.final_n), 0.01 * fine.final_n);
}
