#pragma once

// Monte-Carlo detector models for a single squeezed mode. Every shot is an
// independent preparation of S(xi)|0>; continuous-monitoring back-action is
// not modeled.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sqvac/error.hpp"
#include "sqvac/rng.hpp"
#include "sqvac/squeezed.hpp"

namespace sqvac {

struct DetectorConfig {
    double efficiency = 1.0;        // eta
    double dark_rate = 0.0;         // mean dark counts per shot
    std::size_t shots = 100000;
    double electronic_noise = 0.0;  // additive homodyne variance

    void validate() const {
        if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
            throw Error(ErrorKind::ConfigError, "detector efficiency must lie in [0, 1]");
        }
        if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate)) {
            throw Error(ErrorKind::ConfigError, "dark rate must be finite and >= 0");
        }
        if (shots < 1) throw Error(ErrorKind::ConfigError, "shots must be >= 1");
        if (!(electronic_noise >= 0.0) || !std::isfinite(electronic_noise)) {
            throw Error(ErrorKind::ConfigError, "electronic noise variance must be finite and >= 0");
        }
    }
};

enum class RecordKind { PhotonCount, Homodyne };

/// One simulated record. Homodyne samples are stored bin-major:
/// quadratures[bin * shots + shot] was taken at times[bin].
struct MeasurementRecord {
    RecordKind kind = RecordKind::PhotonCount;
    double mode_frequency = 1.0;
    std::size_t mode_index = 0;
    std::uint64_t seed = 0;
    DetectorConfig detector;
    std::vector<std::int64_t> counts;
    std::vector<double> times;
    std::vector<double> quadratures;

    std::size_t sample_count() const { return kind == RecordKind::PhotonCount ? counts.size() : quadratures.size(); }
};

namespace detail {

template <class Fn>
void for_each_block(std::size_t shots, Fn&& fn) {
    for (std::size_t block = 0, first = 0; first < shots; ++block, first += kShotBlock) {
        fn(block, first, std::min(shots, first + kShotBlock));
    }
}

} // namespace detail

/// Per shot: 2k photons from the pair law P(2k), each kept with probability
/// eta, plus Poisson(dark_rate) dark counts. The pair law is cut where the
/// remaining mass drops below 1e-12; that mass lands on the last pair number.
inline MeasurementRecord simulate_photon_counts(const SqueezeParameter& xi, const DetectorConfig& detector,
                                                std::uint64_t seed, std::size_t mode_index = 0,
                                                double mode_frequency = 1.0) {
    detector.validate();
    std::vector<double> cdf = pair_populations(xi.r(), 1e-12);
    for (std::size_t k = 1; k < cdf.size(); ++k) cdf[k] += cdf[k - 1];

    MeasurementRecord rec;
    rec.kind = RecordKind::PhotonCount;
    rec.mode_frequency = mode_frequency;
    rec.mode_index = mode_index;
    rec.seed = seed;
    rec.detector = detector;
    rec.counts.resize(detector.shots);
    detail::for_each_block(detector.shots, [&](std::size_t block, std::size_t first, std::size_t last) {
        RandomStream rng(derive_seed(seed, mode_index, StreamKind::PhotonCount, 0, block));
        for (std::size_t s = first; s < last; ++s) {
            const std::uint64_t photons = 2 * rng.discrete(cdf);
            std::uint64_t clicks = rng.binomial(photons, detector.efficiency);
            if (detector.dark_rate > 0.0) clicks += rng.poisson(detector.dark_rate);
            rec.counts[s] = static_cast<std::int64_t>(clicks);
        }
    });
    return rec;
}

/// `bins` equally spaced times covering one variance period pi/omega,
/// starting at t = 0. With an even bin count the anti-squeezed time
/// w t = pi/2 is on the grid.
inline std::vector<double> period_times(double omega, std::size_t bins) {
    std::vector<double> t(bins);
    for (std::size_t k = 0; k < bins; ++k) t[k] = kPi / omega * static_cast<double>(k) / static_cast<double>(bins);
    return t;
}

/// Gaussian quadrature samples with the closed-form variance at each time
/// (plus the detector's electronic noise); `shots` samples per time.
inline MeasurementRecord simulate_homodyne(const SqueezeParameter& xi, double omega, const std::vector<double>& times,
                                           const DetectorConfig& detector, std::uint64_t seed,
                                           std::size_t mode_index = 0) {
    detector.validate();
    MeasurementRecord rec;
    rec.kind = RecordKind::Homodyne;
    rec.mode_frequency = omega;
    rec.mode_index = mode_index;
    rec.seed = seed;
    rec.detector = detector;
    rec.times = times;
    rec.quadratures.resize(times.size() * detector.shots);
    for (std::size_t bin = 0; bin < times.size(); ++bin) {
        const double sigma = std::sqrt(quadrature_variances(xi, omega, times[bin]).var_x + detector.electronic_noise);
        double* out = rec.quadratures.data() + bin * detector.shots;
        detail::for_each_block(detector.shots, [&](std::size_t block, std::size_t first, std::size_t last) {
            RandomStream rng(derive_seed(seed, mode_index, StreamKind::Homodyne, bin, block));
            for (std::size_t s = first; s < last; ++s) out[s] = sigma * rng.normal();
        });
    }
    return rec;
}

struct CountSummary {
    std::size_t shots = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased

    double standard_error() const { return std::sqrt(variance / static_cast<double>(shots)); }
};

inline CountSummary summarize_counts(const MeasurementRecord& rec) {
    if (rec.kind != RecordKind::PhotonCount) throw Error(ErrorKind::AlignmentError, "not a photon-count record");
    CountSummary s;
    s.shots = rec.counts.size();
    if (s.shots == 0) return s;
    double sum = 0.0;
    for (auto c : rec.counts) sum += static_cast<double>(c);
    s.mean = sum / static_cast<double>(s.shots);
    double ss = 0.0;
    for (auto c : rec.counts) ss += (static_cast<double>(c) - s.mean) * (static_cast<double>(c) - s.mean);
    s.variance = s.shots > 1 ? ss / static_cast<double>(s.shots - 1) : 0.0;
    return s;
}

struct HomodyneSummary {
    double omega = 1.0;
    std::size_t samples_per_bin = 0;
    std::vector<double> times;
    std::vector<double> variances;  // unbiased, per bin
};

inline HomodyneSummary summarize_homodyne(const MeasurementRecord& rec) {
    if (rec.kind != RecordKind::Homodyne) throw Error(ErrorKind::AlignmentError, "not a homodyne record");
    HomodyneSummary s;
    s.omega = rec.mode_frequency;
    s.times = rec.times;
    s.samples_per_bin = rec.times.empty() ? 0 : rec.quadratures.size() / rec.times.size();
    const std::size_t n = s.samples_per_bin;
    for (std::size_t bin = 0; bin < rec.times.size(); ++bin) {
        std::span<const double> xs(rec.quadratures.data() + bin * n, n);
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        s.variances.push_back(n > 1 ? ss / static_cast<double>(n - 1) : 0.0);
    }
    return s;
}

struct AmplitudeEstimate {
    double amplitude = 0.5;
    std::size_t bin = 0;
    double standard_error = 0.0;  // Gaussian-sample SE of the winning bin's variance
};

/// A = max over bins of the per-bin variance. The max statistic is biased
/// upward by roughly the per-bin standard error when several bins sit near the
/// peak (weak squeezing); the bias shrinks as 1/sqrt(samples per bin).
inline AmplitudeEstimate estimate_fluctuation_amplitude(std::span<const double> times,
                                                        std::span<const double> variances, double omega,
                                                        std::size_t samples_per_bin = 0) {
    constexpr std::size_t kMinBins = 16;
    if (times.size() != variances.size()) throw Error(ErrorKind::AlignmentError, "times/variances length mismatch");
    if (times.size() < kMinBins) {
        throw Error(ErrorKind::ResolutionError,
                    "need >= 16 time bins, got " + std::to_string(times.size()));
    }
    const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
    const double spacing = (*hi - *lo) / static_cast<double>(times.size() - 1);
    if ((*hi - *lo) + spacing < (kPi / omega) * (1.0 - 1e-9)) {
        throw Error(ErrorKind::ResolutionError, "record does not cover a full variance period pi/omega");
    }
    const auto it = std::max_element(variances.begin(), variances.end());
    AmplitudeEstimate est;
    est.amplitude = *it;
    est.bin = static_cast<std::size_t>(it - variances.begin());
    if (samples_per_bin > 1) est.standard_error = est.amplitude * std::sqrt(2.0 / static_cast<double>(samples_per_bin - 1));
    return est;
}

inline AmplitudeEstimate estimate_fluctuation_amplitude(const HomodyneSummary& s) {
    return estimate_fluctuation_amplitude(s.times, s.variances, s.omega, s.samples_per_bin);
}

inline AmplitudeEstimate estimate_fluctuation_amplitude(const MeasurementRecord& rec) {
    return estimate_fluctuation_amplitude(summarize_homodyne(rec));
}

struct SqueezeEstimate {
    double r = 0.0;
    bool clamped = false;  // A < 1/2 was raised to the vacuum value
};

/// Inverts A = e^{2r}/2.
inline SqueezeEstimate xi_from_amplitude(double amplitude) {
    if (amplitude < 0.5) return SqueezeEstimate{0.0, true};
    return SqueezeEstimate{0.5 * std::log(2.0 * amplitude), false};
}

/// Monte-Carlo estimate of the symmetrized two-time correlation: phase-space
/// points (x, p) are drawn from the Gaussian Wigner function of S(xi)|0> and
/// propagated classically, X(t) = x cos wt + p sin wt, which reproduces the
/// symmetrized quantum moments exactly.
inline std::vector<double> sample_two_time_correlation(const SqueezeParameter& xi, double omega,
                                                       const std::vector<double>& t1, const std::vector<double>& t2,
                                                       std::size_t samples, std::uint64_t seed) {
    if (t1.size() != t2.size()) throw Error(ErrorKind::AlignmentError, "t1/t2 length mismatch");
    const auto v = quadrature_variances(xi, omega, 0.0);
    const double cov = -0.5 * std::sinh(2.0 * xi.r()) * std::sin(xi.theta());
    // Cholesky of [[vx, c], [c, vp]].
    const double l11 = std::sqrt(v.var_x);
    const double l21 = cov / l11;
    const double l22 = std::sqrt(v.var_p - l21 * l21);

    double sxx = 0.0, spp = 0.0, sxp = 0.0;
    detail::for_each_block(samples, [&](std::size_t block, std::size_t first, std::size_t last) {
        RandomStream rng(derive_seed(seed, 0, StreamKind::PhaseSpace, 0, block));
        for (std::size_t s = first; s < last; ++s) {
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            const double x = l11 * z1;
            const double p = l21 * z1 + l22 * z2;
            sxx += x * x;
            spp += p * p;
            sxp += x * p;
        }
    });
    const double n = static_cast<double>(samples);
    std::vector<double> out(t1.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        const double c1 = std::cos(omega * t1[i]), s1 = std::sin(omega * t1[i]);
        const double c2 = std::cos(omega * t2[i]), s2 = std::sin(omega * t2[i]);
        out[i] = (sxx * c1 * c2 + spp * s1 * s2 + sxp * (s1 * c2 + c1 * s2)) / n;
    }
    return out;
}

} // namespace sqvac
