#pragma once

// Single-mode squeezed vacua S(xi)|0>, S(xi) = exp{(xi* a^2 - xi a^dagger^2)/2},
// built three ways (operator exponential, Fock series, two-term weak-squeezing
// form), plus closed-form quadrature statistics under free rotation w a^dagger a.
//
// With this convention S(xi)|0> has <a^2> = -e^{i theta} sinh r cosh r, so
// for the Rabi-derived xi = -r (theta = pi) the X quadrature is the
// anti-squeezed one at t = 0: var_x(0) = e^{2r}/2.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sqvac/error.hpp"
#include "sqvac/fock.hpp"
#include "sqvac/phase_space.hpp"

namespace sqvac {

/// xi = r e^{i theta}, r >= 0.
class SqueezeParameter {
public:
    SqueezeParameter() = default;
    SqueezeParameter(double r, double theta) : r_(r), theta_(theta) {
        if (!(r >= 0.0) || !std::isfinite(r) || !std::isfinite(theta)) {
            throw Error(ErrorKind::ConfigError, "squeeze magnitude must be finite and >= 0");
        }
    }

    /// Real xi of either sign; negative values map to theta = pi.
    static SqueezeParameter from_real(double xi) {
        return xi < 0.0 ? SqueezeParameter(-xi, kPi) : SqueezeParameter(xi, 0.0);
    }

    /// The phase the Rabi ground state carries (xi real, non-positive).
    static SqueezeParameter rabi_convention(double r) { return SqueezeParameter(r, kPi); }

    double r() const { return r_; }
    double theta() const { return theta_; }
    complex value() const { return std::polar(r_, theta_); }

private:
    double r_ = 0.0;
    double theta_ = kPi;
};

/// Generator H_sq with e^{-i H_sq} = S(xi): H_sq = i (xi* a^2 - xi a^dagger^2)/2.
inline FockOperator squeeze_generator(const SqueezeParameter& xi, std::size_t dim) {
    const auto a = annihilation(dim);
    const auto ad = a.adjoint();
    const complex z = xi.value();
    return (0.5 * kI) * (std::conj(z) * (a * a) - z * (ad * ad));
}

/// S(xi)|0> by exponentiating the squeeze generator. The exponential is taken
/// in twice the requested dimension so truncation-edge errors of a^2 stay out
/// of the returned levels.
inline FockVector squeezed_vacuum_operator(const SqueezeParameter& xi, std::size_t dim) {
    if (dim < 2) throw Error(ErrorKind::InvalidDimension, "squeezed vacuum needs dim >= 2");
    if (xi.r() == 0.0) return FockVector::vacuum(dim);
    const std::size_t work = 2 * dim;
    const Propagator squeeze(squeeze_generator(xi, work));
    FockVector out = squeeze.apply(FockVector::vacuum(work), 1.0).resized(dim);
    // Odd levels vanish by parity; zero the round-off explicitly.
    CVector amps = out.amplitudes();
    for (Eigen::Index n = 1; n < amps.size(); n += 2) amps(n) = 0.0;
    return FockVector(std::move(amps));
}

inline FockVector squeezed_vacuum_operator(const SqueezeParameter& xi, const Truncation& trunc = {}) {
    return with_adaptive_truncation(trunc, [&](std::size_t d) { return squeezed_vacuum_operator(xi, d); });
}

/// Closed-form Fock expansion:
/// a_{2k} = (-e^{i theta} tanh r)^k sqrt((2k)!) / (2^k k!) / sqrt(cosh r).
/// Not renormalized over the truncation, so populations are exact.
inline FockVector squeezed_vacuum_fock_series(const SqueezeParameter& xi, std::size_t dim) {
    if (dim < 1) throw Error(ErrorKind::InvalidDimension, "squeezed vacuum needs dim >= 1");
    CVector amps = CVector::Zero(static_cast<Eigen::Index>(dim));
    const complex ratio = -std::polar(1.0, xi.theta()) * std::tanh(xi.r());
    complex c = 1.0 / std::sqrt(std::cosh(xi.r()));
    amps(0) = c;
    for (std::size_t k = 1; 2 * k < dim; ++k) {
        const double kk = static_cast<double>(k);
        c *= ratio * std::sqrt((2.0 * kk - 1.0) / (2.0 * kk));
        amps(static_cast<Eigen::Index>(2 * k)) = c;
    }
    return FockVector(std::move(amps));
}

inline FockVector squeezed_vacuum_fock_series(const SqueezeParameter& xi, const Truncation& trunc = {}) {
    return with_adaptive_truncation(trunc, [&](std::size_t d) { return squeezed_vacuum_fock_series(xi, d); });
}

/// Pair-number law P(2k) of S(xi)|0>, truncated once the remaining mass is
/// below `cutoff`. Index k of the result holds P(2k).
inline std::vector<double> pair_populations(double r, double cutoff = 1e-12) {
    std::vector<double> probs;
    const double t2 = std::tanh(r) * std::tanh(r);
    double p = 1.0 / std::cosh(r);
    double total = 0.0;
    for (std::size_t k = 0;; ++k) {
        if (k > 0) {
            const double kk = static_cast<double>(k);
            p *= t2 * (2.0 * kk - 1.0) / (2.0 * kk);
        }
        probs.push_back(p);
        total += p;
        if (1.0 - total < cutoff || p == 0.0 || k > 100000) break;
    }
    return probs;
}

/// Valid regime of the two-term form.
inline bool weak_squeezing_valid(const SqueezeParameter& xi) { return xi.r() < 0.5; }

/// Two-term state  |0>/sqrt(cosh r) + phase sqrt((cosh r - 1)/cosh r) |2>,
/// with the |2> phase -e^{i theta} taken from the Fock series. The two
/// weights already sum to one; the result is renormalized anyway.
inline FockVector weak_squeezing_approx(const SqueezeParameter& xi) {
    const double ch = std::cosh(xi.r());
    CVector amps = CVector::Zero(3);
    amps(0) = 1.0 / std::sqrt(ch);
    amps(2) = -std::polar(1.0, xi.theta()) * std::sqrt((ch - 1.0) / ch);
    FockVector out(std::move(amps));
    out.normalize();
    return out;
}

inline double photon_number(const SqueezeParameter& xi) {
    const double s = std::sinh(xi.r());
    return s * s;
}

struct QuadratureVariances {
    double var_x = 0.5;
    double var_p = 0.5;
    double t = 0.0;
    double omega = 1.0;

    double product() const { return var_x * var_p; }
};

/// Closed-form variances of S(xi)|0> after free rotation for time t:
/// var_x = (cosh 2r - sinh 2r cos(theta - 2 w t))/2, var_p with the opposite sign.
/// For theta = pi: var_x = e^{2r}/2 cos^2 wt + e^{-2r}/2 sin^2 wt.
inline QuadratureVariances quadrature_variances(const SqueezeParameter& xi, double omega, double t) {
    const double c2 = std::cosh(2.0 * xi.r());
    const double s2 = std::sinh(2.0 * xi.r());
    const double phase = std::cos(xi.theta() - 2.0 * omega * t);
    return QuadratureVariances{0.5 * (c2 - s2 * phase), 0.5 * (c2 + s2 * phase), t, omega};
}

/// Symmetrized correlation <{X(t1), X(t2)}>/2 of the freely rotating state:
/// cosh(2r)/2 cos w(t1 - t2) - sinh(2r)/2 cos(w(t1 + t2) - theta).
inline double symmetrized_two_time_correlation(const SqueezeParameter& xi, double omega, double t1, double t2) {
    return 0.5 * std::cosh(2.0 * xi.r()) * std::cos(omega * (t1 - t2)) -
           0.5 * std::sinh(2.0 * xi.r()) * std::cos(omega * (t1 + t2) - xi.theta());
}

/// First and second quadrature moments of a numerically represented state.
/// Uses <a>, <a^2>, <a^dagger a> evaluated on the stored support, so the
/// truncation edge of [a, a^dagger] never enters.
struct QuadratureMoments {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.5;
    double var_p = 0.5;
    double cov_xp = 0.0;  // <{X,P}>/2 - <X><P>
    double mean_n = 0.0;
};

namespace detail {

inline QuadratureMoments moments_from(complex a1, complex a2, double n) {
    QuadratureMoments m;
    m.mean_n = n;
    m.mean_x = std::sqrt(2.0) * a1.real();
    m.mean_p = std::sqrt(2.0) * a1.imag();
    m.var_x = 0.5 * (2.0 * a2.real() + 2.0 * n + 1.0) - m.mean_x * m.mean_x;
    m.var_p = 0.5 * (-2.0 * a2.real() + 2.0 * n + 1.0) - m.mean_p * m.mean_p;
    m.cov_xp = a2.imag() - m.mean_x * m.mean_p;
    return m;
}

} // namespace detail

inline QuadratureMoments quadrature_moments(const FockVector& psi) {
    complex a1 = 0.0;
    complex a2 = 0.0;
    for (std::size_t m = 1; m < psi.dim(); ++m) {
        a1 += std::conj(psi[m - 1]) * std::sqrt(static_cast<double>(m)) * psi[m];
        if (m >= 2) a2 += std::conj(psi[m - 2]) * std::sqrt(static_cast<double>(m * (m - 1))) * psi[m];
    }
    const double norm2 = psi.norm() * psi.norm();
    return detail::moments_from(a1 / norm2, a2 / norm2, psi.mean_photon_number() / norm2);
}

inline QuadratureMoments quadrature_moments(const DensityOperator& rho) {
    const CMatrix& r = rho.matrix();
    complex a1 = 0.0;
    complex a2 = 0.0;
    for (Eigen::Index j = 1; j < r.rows(); ++j) {
        a1 += r(j, j - 1) * std::sqrt(static_cast<double>(j));
        if (j >= 2) a2 += r(j, j - 2) * std::sqrt(static_cast<double>(j * (j - 1)));
    }
    const double tr = rho.trace();
    return detail::moments_from(a1 / tr, a2 / tr, rho.mean_photon_number() / tr);
}

/// C(t1,t2) from the numerical state's Heisenberg-picture moments:
/// X(t) = X cos wt + P sin wt.
inline double two_time_correlation_from_moments(const QuadratureMoments& m, double omega, double t1, double t2) {
    const double c1 = std::cos(omega * t1), s1 = std::sin(omega * t1);
    const double c2 = std::cos(omega * t2), s2 = std::sin(omega * t2);
    const double xx = m.var_x + m.mean_x * m.mean_x;
    const double pp = m.var_p + m.mean_p * m.mean_p;
    const double xp = m.cov_xp + m.mean_x * m.mean_p;
    return xx * c1 * c2 + pp * s1 * s2 + xp * (s1 * c2 + c1 * s2);
}

/// Least-squares fit of C(t1,t2) = s cos w(t1-t2) + c cos w(t1+t2) + d sin w(t1+t2).
struct CorrelationFit {
    double stationary = 0.0;      // coefficient of cos w(t1 - t2)
    double nonstationary_cos = 0.0;
    double nonstationary_sin = 0.0;

    double nonstationary_amplitude() const { return std::hypot(nonstationary_cos, nonstationary_sin); }
};

inline CorrelationFit fit_two_time_correlation(const std::vector<double>& t1, const std::vector<double>& t2,
                                               const std::vector<double>& values, double omega) {
    if (t1.size() != values.size() || t2.size() != values.size() || values.size() < 3) {
        throw Error(ErrorKind::ResolutionError, "correlation fit needs >= 3 aligned samples");
    }
    const auto n = static_cast<Eigen::Index>(values.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        design(i, 0) = std::cos(omega * (t1[k] - t2[k]));
        design(i, 1) = std::cos(omega * (t1[k] + t2[k]));
        design(i, 2) = std::sin(omega * (t1[k] + t2[k]));
        y(i) = values[k];
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(y);
    return CorrelationFit{coef(0), coef(1), coef(2)};
}

struct RotationFrame {
    double t = 0.0;
    FockVector state;
    QuadratureVariances numeric;
    QuadratureVariances analytic;
    PhaseSpaceGrid husimi;
};

/// Evolves S(xi)|0> under w a^dagger a and reports numeric vs closed-form
/// variances and a Husimi grid at each time.
inline std::vector<RotationFrame> rotate_and_report(const SqueezeParameter& xi, double omega,
                                                    const std::vector<double>& times, const GridSpec& grid,
                                                    const Truncation& trunc = {}, bool with_husimi = true) {
    for (double t : times) {
        if (!std::isfinite(t)) throw Error(ErrorKind::ConfigError, "rotation times must be finite");
    }
    const FockVector initial = squeezed_vacuum_operator(xi, trunc);
    const Propagator free(omega * number_operator(initial.dim()));
    std::vector<RotationFrame> frames;
    frames.reserve(times.size());
    for (double t : times) {
        RotationFrame f;
        f.t = t;
        f.state = free.apply(initial, t);
        const auto m = quadrature_moments(f.state);
        f.numeric = QuadratureVariances{m.var_x, m.var_p, t, omega};
        f.analytic = quadrature_variances(xi, omega, t);
        if (with_husimi) f.husimi = husimi_q(f.state, grid);
        frames.push_back(std::move(f));
    }
    return frames;
}

} // namespace sqvac
