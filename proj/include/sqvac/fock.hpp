#pragma once

// Truncated Fock-space linear algebra. hbar = 1 throughout; frequencies are
// angular (rad per unit time).
//
// Joint qubit-field spaces are laid out qubit-major: index = q * dim_field + n,
// with the qubit in the sigma_z eigenbasis ordered excited-first
// (q = 0 is |up>, sigma_z = +1; q = 1 is |down>, sigma_z = -1).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "sqvac/error.hpp"

namespace sqvac {

using complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using QubitOperator = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr complex kI{0.0, 1.0};

/// Adaptive truncation policy: the dimension is doubled from `start_dim`
/// until the top `tail_levels` Fock levels hold less than `tail_tolerance`.
struct Truncation {
    std::size_t start_dim = 32;
    std::size_t max_dim = 2048;
    double tail_tolerance = 1e-10;
    std::size_t tail_levels = 4;
};

class FockVector {
public:
    FockVector() = default;
    explicit FockVector(CVector amplitudes) : amps_(std::move(amplitudes)) {}

    static FockVector basis(std::size_t n, std::size_t dim) {
        if (n >= dim) {
            throw Error(ErrorKind::InvalidDimension,
                        "basis index " + std::to_string(n) + " outside dim " + std::to_string(dim));
        }
        CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
        v(static_cast<Eigen::Index>(n)) = 1.0;
        return FockVector(std::move(v));
    }

    static FockVector vacuum(std::size_t dim) { return basis(0, dim); }

    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const CVector& amplitudes() const { return amps_; }
    complex operator[](std::size_t n) const { return amps_(static_cast<Eigen::Index>(n)); }

    double norm() const { return amps_.norm(); }

    FockVector& normalize() {
        const double n = norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw Error(ErrorKind::NumericalFailure, "cannot normalize a zero or non-finite vector");
        }
        amps_ /= n;
        return *this;
    }

    double population(std::size_t n) const {
        return n < dim() ? std::norm(amps_(static_cast<Eigen::Index>(n))) : 0.0;
    }

    /// Probability mass held by the top `levels` basis states.
    double tail_mass(std::size_t levels = 4) const {
        const std::size_t d = dim();
        const std::size_t first = d > levels ? d - levels : 0;
        double mass = 0.0;
        for (std::size_t n = first; n < d; ++n) mass += population(n);
        return mass;
    }

    bool converged(const Truncation& trunc) const {
        return tail_mass(trunc.tail_levels) < trunc.tail_tolerance;
    }

    double mean_photon_number() const {
        double mean = 0.0;
        for (std::size_t n = 1; n < dim(); ++n) mean += static_cast<double>(n) * population(n);
        return mean;
    }

    /// Zero-pads or truncates to `new_dim`.
    FockVector resized(std::size_t new_dim) const {
        CVector v = CVector::Zero(static_cast<Eigen::Index>(new_dim));
        const auto keep = static_cast<Eigen::Index>(std::min(new_dim, dim()));
        v.head(keep) = amps_.head(keep);
        return FockVector(std::move(v));
    }

    /// <this|other>, padding the shorter vector with zeros.
    complex overlap(const FockVector& other) const {
        const auto common = static_cast<Eigen::Index>(std::min(dim(), other.dim()));
        return amps_.head(common).dot(other.amps_.head(common));
    }

private:
    CVector amps_;
};

inline double fidelity(const FockVector& a, const FockVector& b) {
    return std::norm(a.overlap(b));
}

class FockOperator {
public:
    FockOperator() = default;
    explicit FockOperator(CMatrix entries) : m_(std::move(entries)) {
        if (m_.rows() != m_.cols()) {
            throw Error(ErrorKind::InvalidDimension, "operator matrix must be square");
        }
    }

    static FockOperator identity(std::size_t dim) {
        const auto d = static_cast<Eigen::Index>(dim);
        return FockOperator(CMatrix::Identity(d, d));
    }

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    complex operator()(std::size_t row, std::size_t col) const {
        return m_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    FockOperator adjoint() const { return FockOperator(m_.adjoint()); }

    /// max |M - M^dagger| over all entries.
    double hermiticity_defect() const {
        return m_.size() == 0 ? 0.0 : (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    }

    bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() < tol; }

    FockVector apply(const FockVector& v) const {
        check_dim(v.dim());
        return FockVector(m_ * v.amplitudes());
    }

    complex expectation(const FockVector& v) const {
        check_dim(v.dim());
        return v.amplitudes().dot(m_ * v.amplitudes());
    }

    friend FockOperator operator+(const FockOperator& a, const FockOperator& b) {
        a.check_dim(b.dim());
        return FockOperator(a.m_ + b.m_);
    }
    friend FockOperator operator-(const FockOperator& a, const FockOperator& b) {
        a.check_dim(b.dim());
        return FockOperator(a.m_ - b.m_);
    }
    friend FockOperator operator*(const FockOperator& a, const FockOperator& b) {
        a.check_dim(b.dim());
        return FockOperator(a.m_ * b.m_);
    }
    friend FockOperator operator*(complex s, const FockOperator& a) { return FockOperator(s * a.m_); }
    friend FockOperator operator*(double s, const FockOperator& a) { return FockOperator(s * a.m_); }

private:
    void check_dim(std::size_t d) const {
        if (d != dim()) {
            throw Error(ErrorKind::InvalidDimension,
                        "dimension mismatch: " + std::to_string(dim()) + " vs " + std::to_string(d));
        }
    }

    CMatrix m_;
};

inline FockOperator annihilation(std::size_t dim) {
    if (dim < 2) throw Error(ErrorKind::InvalidDimension, "annihilation operator needs dim >= 2");
    const auto d = static_cast<Eigen::Index>(dim);
    CMatrix a = CMatrix::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return FockOperator(std::move(a));
}

inline FockOperator creation(std::size_t dim) { return annihilation(dim).adjoint(); }

inline FockOperator number_operator(std::size_t dim) {
    if (dim < 2) throw Error(ErrorKind::InvalidDimension, "number operator needs dim >= 2");
    CVector diag(static_cast<Eigen::Index>(dim));
    for (Eigen::Index n = 0; n < diag.size(); ++n) diag(n) = static_cast<double>(n);
    return FockOperator(diag.asDiagonal().toDenseMatrix());
}

/// X = (a + a^dagger)/sqrt(2); vacuum variance 1/2.
inline FockOperator quadrature_x(std::size_t dim) {
    const auto a = annihilation(dim);
    return (1.0 / std::sqrt(2.0)) * (a + a.adjoint());
}

/// P = (a - a^dagger)/(i sqrt(2)); vacuum variance 1/2.
inline FockOperator quadrature_p(std::size_t dim) {
    const auto a = annihilation(dim);
    return (-kI / std::sqrt(2.0)) * (a - a.adjoint());
}

/// Truncated coherent state. Throws truncation-overflow when the Poisson
/// mass beyond the basis (plus the top four levels) exceeds `tolerance`.
inline FockVector coherent_state(complex alpha, std::size_t dim, double tolerance = 1e-10) {
    if (dim < 1) throw Error(ErrorKind::InvalidDimension, "coherent state needs dim >= 1");
    const auto d = static_cast<Eigen::Index>(dim);
    CVector v(d);
    complex term = std::exp(-0.5 * std::norm(alpha));
    double kept = 0.0;
    for (Eigen::Index n = 0; n < d; ++n) {
        if (n > 0) term *= alpha / std::sqrt(static_cast<double>(n));
        v(n) = term;
        kept += std::norm(term);
    }
    FockVector state(std::move(v));
    const double lost = std::max(0.0, 1.0 - kept) + state.tail_mass(4);
    if (lost > tolerance) {
        throw Error(ErrorKind::TruncationOverflow,
                    "coherent state |alpha|^2=" + std::to_string(std::norm(alpha)) +
                        " does not fit in dim " + std::to_string(dim));
    }
    state.normalize();
    return state;
}

/// Fixes the global phase so the largest-magnitude amplitude is real positive.
inline FockVector fix_global_phase(FockVector v) {
    if (v.dim() == 0) return v;
    Eigen::Index idx = 0;
    v.amplitudes().cwiseAbs().maxCoeff(&idx);
    const complex pivot = v.amplitudes()(idx);
    if (std::abs(pivot) == 0.0) return v;
    return FockVector(v.amplitudes() * (std::abs(pivot) / pivot));
}

struct Eigenpair {
    double energy = 0.0;
    FockVector state;
};

inline void require_hermitian(const FockOperator& h, double tol = 1e-12) {
    const double defect = h.hermiticity_defect();
    if (!(defect < tol)) {
        throw Error(ErrorKind::SymmetryViolation,
                    "operator is not Hermitian (max |H - H^dagger| = " + std::to_string(defect) + ")");
    }
}

inline Eigenpair hermitian_ground_state(const FockOperator& h) {
    require_hermitian(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::NumericalFailure, "eigensolver did not converge");
    }
    Eigenpair out;
    out.energy = solver.eigenvalues()(0);
    out.state = fix_global_phase(FockVector(solver.eigenvectors().col(0)));
    const double residual = (h.matrix() * out.state.amplitudes() - out.energy * out.state.amplitudes()).norm();
    if (!(residual < 1e-9)) {
        throw Error(ErrorKind::NumericalFailure,
                    "ground-state residual " + std::to_string(residual) + " exceeds 1e-9");
    }
    return out;
}

class DensityOperator {
public:
    DensityOperator() = default;
    explicit DensityOperator(CMatrix rho) : rho_(std::move(rho)) {}

    static DensityOperator pure(const FockVector& psi) {
        return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint());
    }

    std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
    const CMatrix& matrix() const { return rho_; }

    double trace() const { return rho_.trace().real(); }
    double purity() const { return (rho_ * rho_).trace().real(); }

    double population(std::size_t n) const {
        return n < dim() ? rho_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)).real() : 0.0;
    }

    double tail_mass(std::size_t levels = 4) const {
        const std::size_t first = dim() > levels ? dim() - levels : 0;
        double mass = 0.0;
        for (std::size_t n = first; n < dim(); ++n) mass += population(n);
        return mass;
    }

    double mean_photon_number() const {
        double mean = 0.0;
        for (std::size_t n = 1; n < dim(); ++n) mean += static_cast<double>(n) * population(n);
        return mean;
    }

    complex expectation(const FockOperator& op) const {
        if (op.dim() != dim()) throw Error(ErrorKind::InvalidDimension, "density/operator dim mismatch");
        return (rho_ * op.matrix()).trace();
    }

    /// <psi|rho|psi> for a pure target.
    double fidelity(const FockVector& psi) const {
        const auto common = static_cast<Eigen::Index>(std::min(dim(), psi.dim()));
        const CVector v = psi.amplitudes().head(common);
        return v.dot(rho_.topLeftCorner(common, common) * v).real();
    }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho_, Eigen::EigenvaluesOnly);
        return solver.eigenvalues()(0);
    }

private:
    CMatrix rho_;
};

enum class EvolutionMethod { Eigendecomposition, PadeExponential };

/// Caches the eigendecomposition of a Hermitian H so e^{-iHt} can be applied
/// at many times.
class Propagator {
public:
    explicit Propagator(const FockOperator& h) {
        require_hermitian(h);
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorKind::NumericalFailure, "eigensolver did not converge");
        }
        energies_ = solver.eigenvalues();
        vectors_ = solver.eigenvectors();
    }

    std::size_t dim() const { return static_cast<std::size_t>(energies_.size()); }

    CMatrix unitary(double t) const {
        return vectors_ * phases(t).asDiagonal() * vectors_.adjoint();
    }

    FockVector apply(const FockVector& psi, double t) const {
        if (psi.dim() != dim()) throw Error(ErrorKind::InvalidDimension, "state/propagator dim mismatch");
        CVector coeffs = vectors_.adjoint() * psi.amplitudes();
        coeffs = coeffs.cwiseProduct(phases(t));
        FockVector out(vectors_ * coeffs);
        check_norm(psi.norm(), out.norm());
        return out;
    }

    DensityOperator apply(const DensityOperator& rho, double t) const {
        if (rho.dim() != dim()) throw Error(ErrorKind::InvalidDimension, "density/propagator dim mismatch");
        const CMatrix u = unitary(t);
        DensityOperator out(u * rho.matrix() * u.adjoint());
        if (std::abs(out.trace() - rho.trace()) > 1e-8) {
            throw Error(ErrorKind::IntegrationFailure, "trace drift during evolution");
        }
        return out;
    }

private:
    CVector phases(double t) const {
        CVector p(energies_.size());
        for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = std::exp(-kI * energies_(k) * t);
        return p;
    }

    static void check_norm(double before, double after) {
        if (std::abs(after - before) > 1e-8) {
            throw Error(ErrorKind::IntegrationFailure,
                        "norm drift " + std::to_string(std::abs(after - before)) + " during evolution");
        }
    }

    Eigen::VectorXd energies_;
    CMatrix vectors_;
};

/// e^{-iHt}|psi>. Both methods agree to ~1e-12 on moderate dims; the Pade
/// route exists mainly as an independent check of the eigendecomposition.
inline FockVector evolve(const FockVector& psi, const FockOperator& h, double t,
                         EvolutionMethod method = EvolutionMethod::Eigendecomposition) {
    if (psi.dim() != h.dim()) throw Error(ErrorKind::InvalidDimension, "state/Hamiltonian dim mismatch");
    if (method == EvolutionMethod::Eigendecomposition) return Propagator(h).apply(psi, t);

    require_hermitian(h);
    const CMatrix generator = (-kI * t) * h.matrix();
    const CMatrix u = generator.exp();
    FockVector out(u * psi.amplitudes());
    if (std::abs(out.norm() - psi.norm()) > 1e-8) {
        throw Error(ErrorKind::IntegrationFailure, "norm drift during Pade evolution");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Qubit x field

inline QubitOperator pauli_x() {
    QubitOperator m;
    m << 0, 1, 1, 0;
    return m;
}

inline QubitOperator pauli_z() {
    QubitOperator m;
    m << 1, 0, 0, -1;
    return m;
}

inline QubitOperator qubit_identity() { return QubitOperator::Identity(); }

inline constexpr std::size_t kQubitUp = 0;
inline constexpr std::size_t kQubitDown = 1;

/// qubit_op (x) field_op in the qubit-major layout.
inline FockOperator qubit_field_tensor(const FockOperator& field_op, const QubitOperator& qubit_op) {
    const auto d = static_cast<Eigen::Index>(field_op.dim());
    CMatrix out = CMatrix::Zero(2 * d, 2 * d);
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            if (qubit_op(i, j) != complex(0.0)) out.block(i * d, j * d, d, d) = qubit_op(i, j) * field_op.matrix();
        }
    }
    return FockOperator(std::move(out));
}

/// |field> (x) |qubit>, qubit index kQubitUp or kQubitDown.
inline FockVector joint_product(const FockVector& field, std::size_t qubit) {
    const auto d = static_cast<Eigen::Index>(field.dim());
    CVector v = CVector::Zero(2 * d);
    v.segment(static_cast<Eigen::Index>(qubit) * d, d) = field.amplitudes();
    return FockVector(std::move(v));
}

/// Field component of a joint state for a fixed qubit level (unnormalized).
inline FockVector qubit_component(const FockVector& joint, std::size_t qubit) {
    if (joint.dim() % 2 != 0) throw Error(ErrorKind::InvalidDimension, "joint dim must be even");
    const auto d = static_cast<Eigen::Index>(joint.dim() / 2);
    return FockVector(joint.amplitudes().segment(static_cast<Eigen::Index>(qubit) * d, d));
}

inline DensityOperator partial_trace_qubit(const FockVector& joint) {
    if (joint.dim() < 2 || joint.dim() % 2 != 0) {
        throw Error(ErrorKind::InvalidDimension, "joint state dim must be 2 * dim_field");
    }
    const CVector up = qubit_component(joint, kQubitUp).amplitudes();
    const CVector down = qubit_component(joint, kQubitDown).amplitudes();
    DensityOperator rho(up * up.adjoint() + down * down.adjoint());
    if (std::abs(rho.trace() - 1.0) > 1e-8) {
        throw Error(ErrorKind::NumericalFailure,
                    "reduced state trace " + std::to_string(rho.trace()) + " deviates from 1");
    }
    return rho;
}

// ---------------------------------------------------------------------------
// Adaptive truncation

/// Calls `build(dim)` with dim = start, 2*start, ... until the result's tail
/// mass is below tolerance.
template <class Builder>
auto with_adaptive_truncation(const Truncation& trunc, Builder&& build) {
    for (std::size_t dim = trunc.start_dim;; dim *= 2) {
        auto result = build(dim);
        if (result.tail_mass(trunc.tail_levels) < trunc.tail_tolerance) return result;
        if (dim * 2 > trunc.max_dim) {
            throw Error(ErrorKind::TruncationOverflow,
                        "tail mass " + std::to_string(result.tail_mass(trunc.tail_levels)) +
                            " still above tolerance at dim " + std::to_string(dim));
        }
    }
}

} // namespace sqvac
