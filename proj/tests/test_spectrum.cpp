#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "sqvac/spectrum.hpp"

using namespace sqvac;

namespace {

DetectorConfig detector(std::size_t shots, double eta = 1.0, double dark = 0.001) {
    DetectorConfig d;
    d.shots = shots;
    d.efficiency = eta;
    d.dark_rate = dark;
    return d;
}

ModeSpectrum bump() { return gaussian_bump_profile(linear_grid(1.0, 4.0, 32), 0.3, 2.5, 0.6); }

// One matched 32-mode, 1e5-shot data set shared by the slower tests.
const SpectrumData& matched() {
    static const SpectrumData data = generate_spectrum_data(bump(), detector(100000), 1);
    return data;
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

ErrorKind kind_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no throw";
    return ErrorKind::NumericalFailure;
}

} // namespace

TEST(Profiles, Builders) {
    const auto g = linear_grid(1.0, 4.0, 4);
    EXPECT_EQ(g, (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
    const auto f = flat_profile(g, 0.2);
    EXPECT_EQ(f.r, std::vector<double>(4, 0.2));
    const auto b = gaussian_bump_profile(linear_grid(1.0, 4.0, 7), 0.3, 2.5, 0.6, 0.01);
    EXPECT_NEAR(b.r[3], 0.31, 1e-15);
    EXPECT_NEAR(b.r[0], 0.01 + 0.3 * std::exp(-0.5 * 2.5 * 2.5), 1e-15);
    const auto p = power_law_profile(g, 0.1, 1.0, 2.0, 1.0);
    EXPECT_NEAR(p.r[1], 0.4, 1e-15);
    EXPECT_NEAR(p.r[3], 1.0, 1e-15);  // capped
}

TEST(Profiles, Validation) {
    EXPECT_EQ(kind_of([] { flat_profile({1.0, 1.0}, 0.1); }), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of([] { flat_profile({2.0, 1.0}, 0.1); }), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of([] { flat_profile({1.0, 2.0}, -0.1); }), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of([] { gaussian_bump_profile({1.0, 2.0}, 0.1, 1.5, 0.0); }), ErrorKind::ConfigError);
}

TEST(Profiles, TableFormat) {
    std::istringstream in("# measured\nfrequency,r\n1.0,0.1\n\n2.0 0.2\n3.5,0.05\n");
    const auto s = read_profile_table(in);
    EXPECT_EQ(s.kind, ProfileKind::UserTable);
    EXPECT_EQ(s.frequencies, (std::vector<double>{1.0, 2.0, 3.5}));
    EXPECT_EQ(s.r, (std::vector<double>{0.1, 0.2, 0.05}));
    std::istringstream bad("1.0,0.1\nxx,yy\n");
    EXPECT_THROW(read_profile_table(bad), Error);
}

TEST(Spearman, ReferenceValues) {
    const std::vector<double> x{1, 2, 2, 3, 5, 4, 7, 7, 9}, y{2, 1, 4, 3, 3, 6, 8, 7, 9};
    EXPECT_NEAR(spearman_correlation(x, y), 0.8523282623160101, 1e-14);  // scipy.stats.spearmanr
    const std::vector<double> up{1, 2, 3, 4}, down{8, 6, 4, 2}, flat{1, 1, 1, 1};
    EXPECT_NEAR(spearman_correlation(up, up), 1.0, 1e-15);
    EXPECT_NEAR(spearman_correlation(up, down), -1.0, 1e-15);
    EXPECT_EQ(spearman_correlation(up, flat), 0.0);
}

TEST(ChiSquare, ReferenceValues) {
    // scipy.stats.chi2.sf
    EXPECT_NEAR(chi2_p_value(24.030232541147384, 32), 0.8433193027482719, 1e-12);
    EXPECT_NEAR(chi2_p_value(32, 32), 0.4667448913877211, 1e-12);
    EXPECT_NEAR(chi2_p_value(50, 20), 0.0002214766382487835, 1e-15);
    EXPECT_NEAR(chi2_p_value(3, 8), 0.9343575456215499, 1e-12);
}

TEST(Prediction, Examples) {
    const std::vector<double> a{0.5, 0.625, 0.45};
    const auto full = predicted_counts_from_fluctuations(a, detector(10, 1.0));
    EXPECT_EQ(full[0], 0.0);
    EXPECT_NEAR(full[1], 0.0125, 1e-15);
    EXPECT_EQ(full[2], 0.0);  // clamped
    const auto half = predicted_counts_from_fluctuations(a, detector(10, 0.5));
    EXPECT_NEAR(half[1], 0.5 * full[1], 1e-17);
}

TEST(Prediction, StrictlyIncreasingInAmplitude) {
    std::vector<double> a;
    for (int i = 0; i <= 50; ++i) a.push_back(0.5 + 0.05 * i);
    const auto p = predicted_counts_from_fluctuations(a, detector(10, 1.0, 0.0));
    for (std::size_t i = 1; i < p.size(); ++i) EXPECT_GT(p[i], p[i - 1]);
}

TEST(Generation, VacuumProfile) {
    const auto data = generate_spectrum_data(flat_profile(linear_grid(1.0, 4.0, 8), 0.0), detector(100000), 5);
    for (const auto& m : data.modes) {
        EXPECT_NEAR(m.counts.mean - 0.001, 0.0, 4 * m.counts.standard_error());
        EXPECT_NEAR(estimate_fluctuation_amplitude(m.homodyne).amplitude, 0.5, 0.02 * 0.5);
    }
}

TEST(Generation, DeterministicAcrossThreadCounts) {
    const auto spec = gaussian_bump_profile(linear_grid(1.0, 4.0, 10), 0.3, 2.5, 0.6);
    GenerationOptions one, many;
    one.keep_records = many.keep_records = true;
    many.threads = 3;
    const auto a = generate_spectrum_data(spec, detector(5000), 77, one);
    const auto b = generate_spectrum_data(spec, detector(5000), 77, many);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        EXPECT_EQ(a.count_records[i].counts, b.count_records[i].counts);
        EXPECT_EQ(a.homodyne_records[i].quadratures, b.homodyne_records[i].quadratures);
    }
    const auto c = generate_spectrum_data(spec, detector(5000), 78, one);
    EXPECT_NE(a.count_records[3].counts, c.count_records[3].counts);
}

TEST(Generation, PeaksAlign) {
    const auto& data = matched();
    std::vector<double> counts, amps;
    for (const auto& m : data.modes) {
        counts.push_back(m.counts.mean);
        amps.push_back(estimate_fluctuation_amplitude(m.homodyne).amplitude);
    }
    const auto i = argmax(counts), j = argmax(amps);
    EXPECT_LE(std::max(i, j) - std::min(i, j), 1u);
}

TEST(Compare, MatchedIsConsistent) {
    const auto cmp = compare_spectra(matched());
    EXPECT_EQ(cmp.verdict, Verdict::Consistent);
    EXPECT_GE(cmp.correlation, 0.9);
    EXPECT_GE(cmp.p_value, 0.05);
    EXPECT_EQ(cmp.dof, 32.0);
}

TEST(Compare, DarkCountsAgainstBumpIsInconsistent) {
    const auto dark = generate_spectrum_data(flat_profile(linear_grid(1.0, 4.0, 32), 0.0), detector(100000), 101);
    const auto cmp = compare_spectra(dark.modes, matched().modes, detector(100000));
    EXPECT_EQ(cmp.verdict, Verdict::Inconsistent);
    EXPECT_LE(cmp.correlation, 0.2);
}

TEST(Compare, NoPowerIsInconclusive) {
    const auto data = generate_spectrum_data(flat_profile(linear_grid(1.0, 4.0, 16), 0.0), detector(200), 8);
    EXPECT_EQ(compare_spectra(data).verdict, Verdict::Inconclusive);
}

TEST(Compare, Errors) {
    const auto a = generate_spectrum_data(flat_profile(linear_grid(1.0, 4.0, 8), 0.0), detector(50), 1);
    const auto b = generate_spectrum_data(flat_profile(linear_grid(1.0, 5.0, 8), 0.0), detector(50), 1);
    EXPECT_EQ(kind_of([&] { compare_spectra(a.modes, b.modes, a.detector); }), ErrorKind::AlignmentError);
    const auto small = generate_spectrum_data(flat_profile(linear_grid(1.0, 4.0, 7), 0.0), detector(50), 1);
    EXPECT_EQ(kind_of([&] { compare_spectra(small); }), ErrorKind::ResolutionError);
    CompareConfig cfg;
    cfg.dark_subtraction = DarkSubtraction::ReferenceModes;
    EXPECT_EQ(kind_of([&] { compare_spectra(a, cfg); }), ErrorKind::ConfigError);
}

TEST(Compare, ReferenceModeDarkEstimate) {
    auto spec = gaussian_bump_profile(linear_grid(1.0, 4.0, 16), 0.3, 2.5, 0.3);
    spec.r[0] = spec.r[1] = spec.r[14] = spec.r[15] = 0.0;
    const auto data = generate_spectrum_data(spec, detector(100000, 1.0, 0.02), 4);
    CompareConfig cfg;
    cfg.dark_subtraction = DarkSubtraction::ReferenceModes;
    cfg.reference_modes = {0, 1, 14, 15};
    const auto cmp = compare_spectra(data, cfg);
    EXPECT_NEAR(cmp.dark_rate_used, 0.02, 4 * std::sqrt(0.02 / 400000));
    EXPECT_EQ(cmp.verdict, Verdict::Consistent);
}

TEST(Compare, RankCorrelationInvariantUnderReplication) {
    // replicating every shot 4x keeps means (and ranks) and raises the shot count
    auto counts = matched().modes;
    for (auto& m : counts) {
        m.counts.shots *= 4;
        m.homodyne.samples_per_bin *= 4;
    }
    const auto base = compare_spectra(matched());
    const auto rep = compare_spectra(counts, counts, matched().detector);
    EXPECT_EQ(base.correlation, rep.correlation);
}

TEST(Compare, VerdictStableAtFourTimesShots) {
    const auto data = generate_spectrum_data(bump(), detector(400000), 1);
    const auto cmp = compare_spectra(data);
    EXPECT_EQ(cmp.verdict, compare_spectra(matched()).verdict);
    EXPECT_GE(cmp.correlation, 0.9);
}
