#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sqvac/error.hpp"
#include "sqvac/fock.hpp"

namespace sqvac {

struct Interval {
    double lo = -1.0;
    double hi = 1.0;
    double width() const { return hi - lo; }
};

struct GridSpec {
    Interval re_range{-4.0, 4.0};
    Interval im_range{-4.0, 4.0};
    std::size_t resolution = 201;   // points per axis, endpoints included
    double mass_tolerance = 1e-3;   // epsilon_grid
};

/// Husimi values sampled on a rectangular alpha grid. values(i, j) is at
/// Re(alpha) = re(i), Im(alpha) = im(j).
struct PhaseSpaceGrid {
    GridSpec spec;
    Eigen::MatrixXd values;

    double step_re() const { return spec.re_range.width() / static_cast<double>(spec.resolution - 1); }
    double step_im() const { return spec.im_range.width() / static_cast<double>(spec.resolution - 1); }
    double re(std::size_t i) const { return spec.re_range.lo + step_re() * static_cast<double>(i); }
    double im(std::size_t j) const { return spec.im_range.lo + step_im() * static_cast<double>(j); }

    /// Riemann sum of Q over the window.
    double mass() const { return values.sum() * step_re() * step_im(); }
};

/// Second moments of a grid, in (Re alpha, Im alpha) coordinates.
struct GridMoments {
    Eigen::Vector2d mean;
    Eigen::Matrix2d covariance;
    Eigen::Vector2d axis_lengths;  // covariance eigenvalues, ascending
    Eigen::Matrix2d axes;          // matching eigenvectors as columns

    Eigen::Vector2d major_axis() const { return axes.col(1); }
    double anisotropy() const { return axis_lengths(1) / axis_lengths(0); }
};

/// <alpha|psi> computed directly from the Fock amplitudes; exact for a state
/// supported on the truncated basis.
inline complex coherent_overlap(complex alpha, const FockVector& psi) {
    const complex ac = std::conj(alpha);
    complex term = std::exp(-0.5 * std::norm(alpha));
    complex sum = term * psi[0];
    for (std::size_t n = 1; n < psi.dim(); ++n) {
        term *= ac / std::sqrt(static_cast<double>(n));
        sum += term * psi[n];
    }
    return sum;
}

/// Q(alpha) = |<alpha|psi>|^2 / pi on the grid. Throws truncation-overflow if
/// the window captures less than 1 - mass_tolerance of the state.
inline PhaseSpaceGrid husimi_q(const FockVector& psi, const GridSpec& spec) {
    if (spec.resolution < 2) throw Error(ErrorKind::ResolutionError, "grid resolution must be >= 2");
    PhaseSpaceGrid grid{spec, Eigen::MatrixXd(spec.resolution, spec.resolution)};
    for (std::size_t i = 0; i < spec.resolution; ++i) {
        for (std::size_t j = 0; j < spec.resolution; ++j) {
            const complex alpha(grid.re(i), grid.im(j));
            grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::norm(coherent_overlap(alpha, psi)) / kPi;
        }
    }
    const double captured = grid.mass() / (psi.norm() * psi.norm());
    if (captured < 1.0 - spec.mass_tolerance) {
        throw Error(ErrorKind::TruncationOverflow,
                    "Husimi window captures only " + std::to_string(captured) + " of the state");
    }
    return grid;
}

inline GridMoments grid_moments(const PhaseSpaceGrid& grid) {
    const double total = grid.values.sum();
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < grid.spec.resolution; ++i) {
        for (std::size_t j = 0; j < grid.spec.resolution; ++j) {
            const double w = grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / total;
            mean += w * Eigen::Vector2d(grid.re(i), grid.im(j));
        }
    }
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < grid.spec.resolution; ++i) {
        for (std::size_t j = 0; j < grid.spec.resolution; ++j) {
            const double w = grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / total;
            const Eigen::Vector2d d = Eigen::Vector2d(grid.re(i), grid.im(j)) - mean;
            cov += w * d * d.transpose();
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
    return GridMoments{mean, cov, solver.eigenvalues(), solver.eigenvectors()};
}

/// Square window of +/- `widths` standard deviations of the widest Q axis
/// for a squeezed vacuum of magnitude r (Q variance per axis is
/// (var_quadrature + 1/2)/2 with var_quadrature = e^{2r}/2).
inline GridSpec default_grid_for_squeezing(double r, std::size_t resolution = 201, double widths = 4.0) {
    const double sigma = std::sqrt(0.5 * (0.5 * std::exp(2.0 * r) + 0.5));
    const double half = widths * sigma;
    return GridSpec{{-half, half}, {-half, half}, resolution, 1e-3};
}

} // namespace sqvac
