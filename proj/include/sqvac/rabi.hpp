#pragma once

// Quantum Rabi model  H = w a^dagger a + (W/2) sigma_z + (g/2)(a + a^dagger) sigma_x
// and its qubit-eliminated effective oscillator
// H_eff = w a^dagger a - (g^2 / 4W)(a + a^dagger)^2.
//
// Writing H_eff with x = (a + a^dagger)/sqrt(2w) gives p^2/2 + w^2(1 - g^2/g_c^2) x^2 / 2
// with g_c = sqrt(w W); g_c is always derived, never an input.

#include <cmath>
#include <cstddef>
#include <string>

#include "sqvac/error.hpp"
#include "sqvac/fock.hpp"
#include "sqvac/squeezed.hpp"

namespace sqvac {

struct RabiParams {
    double omega = 1.0;        // field
    double qubit_omega = 1.0;  // two-level splitting (capital Omega)
    double g = 0.0;

    RabiParams() = default;
    RabiParams(double field, double qubit, double coupling) : omega(field), qubit_omega(qubit), g(coupling) {
        validate();
    }

    void validate() const {
        if (!(omega > 0.0) || !(qubit_omega > 0.0) || !(g >= 0.0) || !std::isfinite(omega) ||
            !std::isfinite(qubit_omega) || !std::isfinite(g)) {
            throw Error(ErrorKind::ConfigError, "Rabi parameters need omega > 0, Omega > 0, g >= 0");
        }
    }

    /// Builds params with g given as a fraction of g_c.
    static RabiParams from_ratio(double field, double qubit, double g_over_gc) {
        return RabiParams(field, qubit, g_over_gc * std::sqrt(field * qubit));
    }
};

inline double critical_coupling(const RabiParams& p) {
    p.validate();
    return std::sqrt(p.omega * p.qubit_omega);
}

/// 1 - g^2/g_c^2.
inline double softening(const RabiParams& p) {
    const double ratio = p.g / critical_coupling(p);
    return 1.0 - ratio * ratio;
}

inline void require_subcritical(const RabiParams& p) {
    if (!(softening(p) > 0.0)) {
        throw Error(ErrorKind::BeyondCritical, "g >= g_c: effective oscillator frequency is not real");
    }
}

inline FockOperator build_rabi_hamiltonian(const RabiParams& p, std::size_t dim) {
    p.validate();
    const auto a = annihilation(dim);
    const auto field_x = a + a.adjoint();
    return qubit_field_tensor(p.omega * number_operator(dim), qubit_identity()) +
           qubit_field_tensor(FockOperator::identity(dim), (0.5 * p.qubit_omega) * pauli_z()) +
           qubit_field_tensor((0.5 * p.g) * field_x, pauli_x());
}

inline FockOperator build_effective_hamiltonian(const RabiParams& p, std::size_t dim) {
    require_subcritical(p);
    const auto a = annihilation(dim);
    // (a + a^dagger)^2 built from its exact matrix elements rather than by
    // squaring the truncated sum, so the last diagonal entry is 2n+1 too.
    const auto d = static_cast<Eigen::Index>(dim);
    CMatrix x2 = CMatrix::Zero(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
        x2(n, n) = 2.0 * static_cast<double>(n) + 1.0;
        if (n + 2 < d) {
            const double v = std::sqrt(static_cast<double>((n + 1) * (n + 2)));
            x2(n, n + 2) = v;
            x2(n + 2, n) = v;
        }
    }
    const double shift = p.g * p.g / (4.0 * p.qubit_omega);
    return p.omega * number_operator(dim) - shift * FockOperator(std::move(x2));
}

/// (w / 2)(sqrt(1 - g^2/g_c^2) - 1).
inline double effective_ground_energy(const RabiParams& p) {
    require_subcritical(p);
    return 0.5 * p.omega * (std::sqrt(softening(p)) - 1.0);
}

struct SwValidity {
    bool valid = false;
    double margin = 0.0;  // (1 - g^2/g_c^2) - (w/W)^{2/3}
};

/// Qubit-elimination regime check 1 - g^2/g_c^2 > (w/W)^{2/3}.
inline SwValidity sw_validity(const RabiParams& p) {
    const double margin = softening(p) - std::cbrt((p.omega / p.qubit_omega) * (p.omega / p.qubit_omega));
    return SwValidity{margin > 0.0, margin};
}

/// xi = ln(1 - g^2/g_c^2)/4 <= 0, returned as r = |xi|, theta = pi.
inline SqueezeParameter squeezing_parameter(const RabiParams& p) {
    require_subcritical(p);
    return SqueezeParameter::rabi_convention(std::abs(0.25 * std::log(softening(p))));
}

inline Eigenpair effective_ground_state(const RabiParams& p, std::size_t dim) {
    return hermitian_ground_state(build_effective_hamiltonian(p, dim));
}

inline Eigenpair effective_ground_state(const RabiParams& p, const Truncation& trunc = {}) {
    struct Result {
        Eigenpair pair;
        double tail_mass(std::size_t levels) const { return pair.state.tail_mass(levels); }
    };
    return with_adaptive_truncation(trunc, [&](std::size_t d) { return Result{effective_ground_state(p, d)}; })
        .pair;
}

struct ExactGroundReport {
    RabiParams params;
    std::size_t field_dim = 0;
    double energy = 0.0;
    FockVector joint_state;
    DensityOperator field_state;          // qubit traced out
    FockVector down_conditioned;          // field component with the qubit in |down>, normalized
    double qubit_up_population = 0.0;
    SqueezeParameter xi;
    FockVector squeezed_reference;
    double fidelity = 0.0;                // <S(xi)0| rho |S(xi)0>
    double conditioned_fidelity = 0.0;    // |<S(xi)0|down_conditioned>|^2
    SwValidity validity;

    double tail_mass(std::size_t levels) const { return field_state.tail_mass(levels); }
};

inline ExactGroundReport exact_ground_field_state(const RabiParams& p, std::size_t dim) {
    ExactGroundReport rep;
    rep.params = p;
    rep.field_dim = dim;
    rep.validity = sw_validity(p);
    const auto ground = hermitian_ground_state(build_rabi_hamiltonian(p, dim));
    rep.energy = ground.energy;
    rep.joint_state = ground.state;
    rep.field_state = partial_trace_qubit(ground.state);
    FockVector down = qubit_component(ground.state, kQubitDown);
    rep.qubit_up_population = qubit_component(ground.state, kQubitUp).norm();
    rep.qubit_up_population *= rep.qubit_up_population;
    rep.down_conditioned = fix_global_phase(down.normalize());
    rep.xi = squeezing_parameter(p);
    rep.squeezed_reference = squeezed_vacuum_fock_series(rep.xi, dim);
    rep.fidelity = rep.field_state.fidelity(rep.squeezed_reference);
    rep.conditioned_fidelity = fidelity(rep.squeezed_reference, rep.down_conditioned);
    return rep;
}

inline ExactGroundReport exact_ground_field_state(const RabiParams& p, const Truncation& trunc = {}) {
    return with_adaptive_truncation(trunc, [&](std::size_t d) { return exact_ground_field_state(p, d); });
}

/// Parity of the Rabi ground state: exp(i pi (a^dagger a + (1 + sigma_z)/2)).
inline FockOperator rabi_parity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    CVector diag(2 * d);
    for (Eigen::Index q = 0; q < 2; ++q) {
        for (Eigen::Index n = 0; n < d; ++n) {
            const Eigen::Index excitations = n + (q == static_cast<Eigen::Index>(kQubitUp) ? 1 : 0);
            diag(q * d + n) = excitations % 2 == 0 ? 1.0 : -1.0;
        }
    }
    return FockOperator(diag.asDiagonal().toDenseMatrix());
}

} // namespace sqvac
