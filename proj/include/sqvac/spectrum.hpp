#pragma once

// Multimode test of the squeezing hypothesis: per-mode photon-count excesses
// are compared with the counts the measured fluctuation amplitudes A(w) imply
// through <n> = sinh^2 r, r = ln(2A)/2. "Resemblance" is operationalized as a
// Spearman rank correlation plus a chi-square goodness of fit of the counts
// against that prediction.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <span>
#include <exception>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "sqvac/error.hpp"
#include "sqvac/measurement.hpp"
#include "sqvac/squeezed.hpp"

namespace sqvac {

enum class ProfileKind { Flat, GaussianBump, PowerLaw, UserTable };

inline std::string to_string(ProfileKind k) {
    switch (k) {
    case ProfileKind::Flat: return "flat";
    case ProfileKind::GaussianBump: return "gaussian-bump";
    case ProfileKind::PowerLaw: return "power-law";
    case ProfileKind::UserTable: return "user-table";
    }
    return "unknown";
}

struct ModeSpectrum {
    std::vector<double> frequencies;  // strictly ascending, rad/time
    std::vector<double> r;            // squeeze magnitude per mode
    ProfileKind kind = ProfileKind::Flat;

    std::size_t size() const { return frequencies.size(); }

    void validate() const {
        if (frequencies.size() != r.size()) throw Error(ErrorKind::ConfigError, "frequency/r length mismatch");
        if (frequencies.empty()) throw Error(ErrorKind::ConfigError, "spectrum has no modes");
        for (std::size_t i = 0; i < size(); ++i) {
            if (!(frequencies[i] > 0.0) || !std::isfinite(frequencies[i])) {
                throw Error(ErrorKind::ConfigError, "mode frequencies must be finite and > 0");
            }
            if (i > 0 && !(frequencies[i] > frequencies[i - 1])) {
                throw Error(ErrorKind::ConfigError, "mode frequencies must be strictly ascending");
            }
            if (!(r[i] >= 0.0) || !std::isfinite(r[i])) {
                throw Error(ErrorKind::ConfigError, "squeeze profile must be finite and >= 0");
            }
        }
    }
};

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw Error(ErrorKind::ConfigError, "grid needs n >= 2 and hi > lo");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

inline ModeSpectrum flat_profile(std::vector<double> freqs, double r0) {
    ModeSpectrum s{std::move(freqs), {}, ProfileKind::Flat};
    s.r.assign(s.frequencies.size(), r0);
    s.validate();
    return s;
}

/// r(w) = baseline + peak * exp(-(w - center)^2 / (2 width^2)).
inline ModeSpectrum gaussian_bump_profile(std::vector<double> freqs, double peak, double center, double width,
                                          double baseline = 0.0) {
    if (!(width > 0.0)) throw Error(ErrorKind::ConfigError, "bump width must be > 0");
    ModeSpectrum s{std::move(freqs), {}, ProfileKind::GaussianBump};
    for (double w : s.frequencies) {
        const double z = (w - center) / width;
        s.r.push_back(baseline + peak * std::exp(-0.5 * z * z));
    }
    s.validate();
    return s;
}

/// r(w) = min(cap, r_ref * (w / w_ref)^exponent).
inline ModeSpectrum power_law_profile(std::vector<double> freqs, double r_ref, double w_ref, double exponent,
                                      double cap = 3.0) {
    if (!(w_ref > 0.0)) throw Error(ErrorKind::ConfigError, "power-law reference frequency must be > 0");
    ModeSpectrum s{std::move(freqs), {}, ProfileKind::PowerLaw};
    for (double w : s.frequencies) s.r.push_back(std::min(cap, r_ref * std::pow(w / w_ref, exponent)));
    s.validate();
    return s;
}

/// Table format: one mode per line, "frequency,r" (comma or whitespace
/// separated). Blank lines and lines starting with '#' are skipped, as is a
/// leading header line whose first field is not numeric.
inline ModeSpectrum read_profile_table(std::istream& in) {
    ModeSpectrum s;
    s.kind = ProfileKind::UserTable;
    std::string line;
    bool first_content = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double w = 0.0, r = 0.0;
        if (!(fields >> w >> r)) {
            if (first_content) {
                first_content = false;
                continue;
            }
            throw Error(ErrorKind::ConfigError, "profile table line " + std::to_string(lineno) + " is not 'frequency,r'");
        }
        first_content = false;
        s.frequencies.push_back(w);
        s.r.push_back(r);
    }
    s.validate();
    return s;
}

struct ModeData {
    double omega = 1.0;
    double r_true = 0.0;
    CountSummary counts;
    HomodyneSummary homodyne;
};

struct SpectrumData {
    ModeSpectrum spectrum;
    DetectorConfig detector;
    std::uint64_t seed = 0;
    std::vector<ModeData> modes;
    // Raw records, filled only when requested.
    std::vector<MeasurementRecord> count_records;
    std::vector<MeasurementRecord> homodyne_records;
};

struct GenerationOptions {
    std::size_t time_bins = 16;
    unsigned threads = 1;
    bool keep_records = false;
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

} // namespace detail

/// Photon-count and homodyne data for every mode. Mode i uses mode index i in
/// the seed derivation, so results do not depend on the thread count.
inline SpectrumData generate_spectrum_data(const ModeSpectrum& spectrum, const DetectorConfig& detector,
                                           std::uint64_t seed, const GenerationOptions& opts = {}) {
    spectrum.validate();
    detector.validate();
    SpectrumData data;
    data.spectrum = spectrum;
    data.detector = detector;
    data.seed = seed;
    data.modes.resize(spectrum.size());
    if (opts.keep_records) {
        data.count_records.resize(spectrum.size());
        data.homodyne_records.resize(spectrum.size());
    }
    detail::parallel_for(spectrum.size(), opts.threads, [&](std::size_t i) {
        const double omega = spectrum.frequencies[i];
        const auto xi = SqueezeParameter::rabi_convention(spectrum.r[i]);
        auto counts = simulate_photon_counts(xi, detector, seed, i, omega);
        auto homodyne = simulate_homodyne(xi, omega, period_times(omega, opts.time_bins), detector, seed, i);
        ModeData& m = data.modes[i];
        m.omega = omega;
        m.r_true = spectrum.r[i];
        m.counts = summarize_counts(counts);
        m.homodyne = summarize_homodyne(homodyne);
        if (opts.keep_records) {
            data.count_records[i] = std::move(counts);
            data.homodyne_records[i] = std::move(homodyne);
        }
    });
    return data;
}

/// eta * sinh^2(ln(2A)/2) per shot; A below 1/2 is clamped to the vacuum.
inline std::vector<double> predicted_counts_from_fluctuations(std::span<const double> amplitudes,
                                                              const DetectorConfig& detector) {
    std::vector<double> out;
    out.reserve(amplitudes.size());
    for (double a : amplitudes) {
        const double s = std::sinh(xi_from_amplitude(a).r);
        out.push_back(detector.efficiency * s * s);
    }
    return out;
}

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either input has no rank variance.
inline double spearman_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorKind::AlignmentError, "rank correlation inputs differ in length");
    const auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

/// Upper tail of the chi-square distribution.
inline double chi2_p_value(double chi2, double dof) { return boost::math::gamma_q(0.5 * dof, 0.5 * chi2); }

enum class Verdict { Consistent, Inconsistent, Inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Consistent: return "CONSISTENT";
    case Verdict::Inconsistent: return "INCONSISTENT";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "UNKNOWN";
}

enum class DarkSubtraction { Known, ReferenceModes };

struct CompareConfig {
    double min_correlation = 0.8;  // theta_corr, Spearman
    double min_p_value = 0.05;     // theta_p
    double power_sigma = 3.0;
    std::size_t min_modes = 8;
    DarkSubtraction dark_subtraction = DarkSubtraction::Known;
    std::vector<std::size_t> reference_modes;  // used with ReferenceModes
};

struct SpectrumComparison {
    std::vector<double> frequencies;
    std::vector<double> count_spectrum;  // dark-subtracted mean counts per shot
    std::vector<double> count_se;
    std::vector<double> fluctuation_spectrum;  // A(w)
    std::vector<double> fluctuation_se;
    std::vector<double> predicted_counts;
    std::vector<double> predicted_se;
    double dark_rate_used = 0.0;
    double correlation = 0.0;
    double chi2 = 0.0;
    double dof = 0.0;
    double p_value = 0.0;
    double max_predicted_significance = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

/// Per-mode inputs to the comparison; `detector` supplies eta and the known
/// dark rate.
inline SpectrumComparison compare_spectra(const std::vector<ModeData>& counts_side,
                                          const std::vector<ModeData>& fluctuation_side,
                                          const DetectorConfig& detector, const CompareConfig& cfg = {}) {
    if (counts_side.size() != fluctuation_side.size()) {
        throw Error(ErrorKind::AlignmentError, "count and fluctuation spectra have different mode counts");
    }
    for (std::size_t i = 0; i < counts_side.size(); ++i) {
        if (counts_side[i].omega != fluctuation_side[i].omega) {
            throw Error(ErrorKind::AlignmentError, "count and fluctuation spectra use different frequency grids");
        }
    }
    if (counts_side.size() < cfg.min_modes) {
        throw Error(ErrorKind::ResolutionError, "spectrum comparison needs >= " + std::to_string(cfg.min_modes) + " modes");
    }

    const std::size_t n = counts_side.size();
    SpectrumComparison out;

    double dark = detector.dark_rate;
    double dark_var = 0.0;
    if (cfg.dark_subtraction == DarkSubtraction::ReferenceModes) {
        if (cfg.reference_modes.empty()) throw Error(ErrorKind::ConfigError, "reference dark subtraction needs reference modes");
        double sum = 0.0, shots = 0.0, var_sum = 0.0;
        for (auto idx : cfg.reference_modes) {
            if (idx >= n) throw Error(ErrorKind::ConfigError, "reference mode index out of range");
            const auto& c = counts_side[idx].counts;
            sum += c.mean * static_cast<double>(c.shots);
            shots += static_cast<double>(c.shots);
            var_sum += c.variance * static_cast<double>(c.shots);
        }
        dark = sum / shots;
        dark_var = (var_sum / shots) / shots;
    }
    out.dark_rate_used = dark;

    for (std::size_t i = 0; i < n; ++i) {
        out.frequencies.push_back(counts_side[i].omega);
        const auto amp = estimate_fluctuation_amplitude(fluctuation_side[i].homodyne);
        out.fluctuation_spectrum.push_back(amp.amplitude);
        out.fluctuation_se.push_back(amp.standard_error);
    }
    out.predicted_counts = predicted_counts_from_fluctuations(out.fluctuation_spectrum, detector);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = counts_side[i].counts;
        const double shots = static_cast<double>(c.shots);
        out.count_spectrum.push_back(c.mean - dark);
        // Squeezed-vacuum counts come in pairs and are super-Poissonian; the
        // sample variance is used, floored at the Poisson variance of the
        // predicted total rate.
        const double poisson_floor = out.predicted_counts[i] + dark;
        out.count_se.push_back(std::sqrt(std::max(c.variance, poisson_floor) / shots + dark_var));

        const auto est = xi_from_amplitude(out.fluctuation_spectrum[i]);
        const double a = out.fluctuation_spectrum[i];
        const double slope = est.clamped ? 0.0 : detector.efficiency * std::sinh(2.0 * est.r) / (2.0 * a);
        out.predicted_se.push_back(slope * out.fluctuation_se[i]);
    }

    out.correlation = spearman_correlation(out.count_spectrum, out.predicted_counts);
    for (std::size_t i = 0; i < n; ++i) {
        const double sigma2 = out.count_se[i] * out.count_se[i] + out.predicted_se[i] * out.predicted_se[i];
        const double d = out.count_spectrum[i] - out.predicted_counts[i];
        if (sigma2 > 0.0) out.chi2 += d * d / sigma2;
        out.max_predicted_significance =
            std::max(out.max_predicted_significance, out.count_se[i] > 0.0 ? out.predicted_counts[i] / out.count_se[i] : 0.0);
    }
    out.dof = static_cast<double>(n);
    out.p_value = chi2_p_value(out.chi2, out.dof);

    if (out.max_predicted_significance < cfg.power_sigma) {
        out.verdict = Verdict::Inconclusive;
    } else if (out.correlation >= cfg.min_correlation && out.p_value >= cfg.min_p_value) {
        out.verdict = Verdict::Consistent;
    } else {
        out.verdict = Verdict::Inconsistent;
    }
    return out;
}

inline SpectrumComparison compare_spectra(const SpectrumData& data, const CompareConfig& cfg = {}) {
    return compare_spectra(data.modes, data.modes, data.detector, cfg);
}

} // namespace sqvac
