#pragma once

// Sudden and ramped switch-off of the light-matter coupling. The sudden quench
// keeps the state and swaps the Hamiltonian for w a^dagger a; the ramp steps
// H_eff(g(t)) piecewise-constantly with g falling linearly to zero.

#include <cmath>
#include <cstddef>
#include <vector>

#include "sqvac/error.hpp"
#include "sqvac/fock.hpp"
#include "sqvac/rabi.hpp"
#include "sqvac/squeezed.hpp"

namespace sqvac {

enum class QuenchSource { Exact, Effective };

struct QuenchSample {
    double t = 0.0;
    double mean_n = 0.0;
    double purity = 1.0;
    QuadratureVariances variances;
    QuadratureVariances analytic;  // closed form for the effective squeezed vacuum
};

struct QuenchResult {
    RabiParams params;
    QuenchSource source = QuenchSource::Effective;
    SqueezeParameter xi;
    std::size_t field_dim = 0;
    double pre_quench_n = 0.0;
    bool sw_valid = true;
    std::vector<QuenchSample> trace;
    std::vector<std::vector<double>> populations;  // per time, first `kTrackedLevels` Fock populations

    static constexpr std::size_t kTrackedLevels = 8;
};

inline QuenchResult run_quench(const RabiParams& params, const std::vector<double>& times, QuenchSource source,
                               const Truncation& trunc = {}) {
    require_subcritical(params);
    QuenchResult out;
    out.params = params;
    out.source = source;
    out.xi = squeezing_parameter(params);
    out.sw_valid = sw_validity(params).valid;

    DensityOperator initial;
    if (source == QuenchSource::Exact) {
        initial = exact_ground_field_state(params, trunc).field_state;
    } else {
        initial = DensityOperator::pure(squeezed_vacuum_operator(out.xi, trunc));
    }
    out.field_dim = initial.dim();
    out.pre_quench_n = initial.mean_photon_number();

    const Propagator free(params.omega * number_operator(initial.dim()));
    out.trace.reserve(times.size());
    for (double t : times) {
        const DensityOperator rho = free.apply(initial, t);
        const auto m = quadrature_moments(rho);
        QuenchSample s;
        s.t = t;
        s.mean_n = m.mean_n;
        s.purity = rho.purity();
        s.variances = QuadratureVariances{m.var_x, m.var_p, t, params.omega};
        s.analytic = quadrature_variances(out.xi, params.omega, t);
        out.trace.push_back(s);
        std::vector<double> pops(QuenchResult::kTrackedLevels);
        for (std::size_t n = 0; n < pops.size(); ++n) pops[n] = rho.population(n);
        out.populations.push_back(std::move(pops));
    }
    return out;
}

struct RampResult {
    double final_n = 0.0;
    double initial_n = 0.0;
    std::size_t steps = 0;
    std::size_t field_dim = 0;
};

/// Ramps g linearly from params.g to 0 over `duration` in `steps` equal steps,
/// each evolved under H_eff at the step-midpoint coupling, starting from the
/// H_eff ground state. Returns <a^dagger a> at the end of the ramp.
inline RampResult adiabatic_reference(const RabiParams& params, double duration, std::size_t steps,
                                      const Truncation& trunc = {}) {
    if (steps < 10) throw Error(ErrorKind::ResolutionError, "ramp needs at least 10 steps");
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw Error(ErrorKind::ConfigError, "ramp duration must be finite and >= 0");
    }
    require_subcritical(params);
    const auto ground = effective_ground_state(params, trunc);
    const std::size_t dim = ground.state.dim();

    RampResult out;
    out.steps = steps;
    out.field_dim = dim;
    out.initial_n = ground.state.mean_photon_number();
    FockVector psi = ground.state;
    const double dt = duration / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double frac = (static_cast<double>(k) + 0.5) / static_cast<double>(steps);
        RabiParams step = params;
        step.g = params.g * (1.0 - frac);
        // H_eff is real symmetric: a real eigensolver halves the cost.
        const Eigen::MatrixXd h = build_effective_hamiltonian(step, dim).matrix().real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
        if (solver.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "ramp eigensolver failed");
        const Eigen::MatrixXcd v = solver.eigenvectors().cast<complex>();
        CVector c = v.adjoint() * psi.amplitudes();
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(-kI * solver.eigenvalues()(i) * dt);
        psi = FockVector(v * c);
    }
    if (std::abs(psi.norm() - 1.0) > 1e-8) throw Error(ErrorKind::IntegrationFailure, "norm drift during ramp");
    out.final_n = psi.mean_photon_number();
    return out;
}

} // namespace sqvac
