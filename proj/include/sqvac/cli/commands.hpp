#pragma once

// Subcommand implementations. Each command computes its complete output set
// in memory first; files are written only after everything succeeded, so a
// failing run leaves no partial outputs.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sqvac/cli/config.hpp"
#include "sqvac/error.hpp"
#include "sqvac/fock.hpp"
#include "sqvac/io.hpp"
#include "sqvac/measurement.hpp"
#include "sqvac/phase_space.hpp"
#include "sqvac/quench.hpp"
#include "sqvac/rabi.hpp"
#include "sqvac/spectrum.hpp"
#include "sqvac/squeezed.hpp"
#include "sqvac/svg.hpp"

namespace sqvac::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kNumericalFailure = 3 };

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::BeyondCritical:
    case ErrorKind::InvalidDimension:
        return kConfigError;
    default:
        return kNumericalFailure;
    }
}

/// Relative path -> file content, written in key order.
using OutputSet = std::map<std::string, std::string>;

inline void write_outputs(const OutputSet& outputs, const std::filesystem::path& dir) {
    for (const auto& [name, content] : outputs) io::write_file_atomic(dir / name, content);
}

inline std::string resolved_config_name() { return "resolved_config.yaml"; }

// ---------------------------------------------------------------------------
// Config readers

inline RabiParams read_rabi(const Config& cfg) {
    const double omega = cfg.get<double>("rabi.omega");
    const double qubit = cfg.get<double>("rabi.Omega");
    if (cfg.has("rabi.g") == cfg.has("rabi.g_over_gc")) {
        throw Error(ErrorKind::ConfigError, "give exactly one of rabi.g and rabi.g_over_gc");
    }
    if (cfg.has("rabi.g")) return RabiParams(omega, qubit, cfg.get<double>("rabi.g"));
    if (!(omega > 0.0 && qubit > 0.0)) throw Error(ErrorKind::ConfigError, "rabi.omega and rabi.Omega must be > 0");
    return RabiParams::from_ratio(omega, qubit, cfg.get<double>("rabi.g_over_gc"));
}

inline DetectorConfig read_detector(const Config& cfg) {
    DetectorConfig d;
    d.efficiency = cfg.get<double>("detector.efficiency");
    d.dark_rate = cfg.get<double>("detector.dark_rate");
    d.shots = cfg.get<std::size_t>("detector.shots");
    d.electronic_noise = cfg.get<double>("detector.electronic_noise");
    d.validate();
    return d;
}

inline std::vector<double> read_frequency_grid(const Config& cfg) {
    return linear_grid(cfg.get<double>("spectrum.grid.lo"), cfg.get<double>("spectrum.grid.hi"),
                       cfg.get<std::size_t>("spectrum.grid.modes"));
}

/// Profile block: {kind: flat, r} | {kind: gaussian-bump, peak, center, width, baseline}
/// | {kind: power-law, r_ref, omega_ref, exponent, cap} | {kind: user-table, path}.
inline ModeSpectrum read_profile(const Config& cfg, const std::string& key) {
    const auto kind = cfg.get<std::string>(key + ".kind");
    if (kind == "user-table") {
        const auto path = cfg.get<std::string>(key + ".path");
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::ConfigError, "cannot read profile table " + path);
        return read_profile_table(in);
    }
    auto freqs = read_frequency_grid(cfg);
    if (kind == "flat") return flat_profile(std::move(freqs), cfg.get<double>(key + ".r"));
    if (kind == "gaussian-bump") {
        return gaussian_bump_profile(std::move(freqs), cfg.get<double>(key + ".peak"), cfg.get<double>(key + ".center"),
                                     cfg.get<double>(key + ".width"), cfg.get_or<double>(key + ".baseline", 0.0));
    }
    if (kind == "power-law") {
        return power_law_profile(std::move(freqs), cfg.get<double>(key + ".r_ref"), cfg.get<double>(key + ".omega_ref"),
                                 cfg.get<double>(key + ".exponent"), cfg.get_or<double>(key + ".cap", 3.0));
    }
    throw Error(ErrorKind::ConfigError, "unknown profile kind '" + kind + "'");
}

inline CompareConfig read_compare(const Config& cfg) {
    CompareConfig c;
    c.min_correlation = cfg.get<double>("spectrum.compare.min_correlation");
    c.min_p_value = cfg.get<double>("spectrum.compare.min_p_value");
    c.power_sigma = cfg.get<double>("spectrum.compare.power_sigma");
    const auto mode = cfg.get<std::string>("spectrum.compare.dark_subtraction");
    if (mode == "known") {
        c.dark_subtraction = DarkSubtraction::Known;
    } else if (mode == "reference") {
        c.dark_subtraction = DarkSubtraction::ReferenceModes;
    } else {
        throw Error(ErrorKind::ConfigError, "dark_subtraction must be 'known' or 'reference'");
    }
    c.reference_modes = cfg.get<std::vector<std::size_t>>("spectrum.compare.reference_modes");
    return c;
}

inline std::uint64_t read_seed(const Config& cfg) { return cfg.get<std::uint64_t>("seed"); }

// ---------------------------------------------------------------------------
// ground-state

inline OutputSet cmd_ground_state(const Config& cfg) {
    const RabiParams params = read_rabi(cfg);
    const Truncation trunc = cfg.truncation();

    const double gc = critical_coupling(params);
    const auto validity = sw_validity(params);
    const auto xi = squeezing_parameter(params);
    const auto exact = exact_ground_field_state(params, trunc);
    const auto effective = effective_ground_state(params, trunc);
    const auto reference = squeezed_vacuum_fock_series(xi, trunc);

    nlohmann::json j;
    j["params"] = {{"omega", params.omega}, {"Omega", params.qubit_omega}, {"g", params.g}};
    j["g_c"] = gc;
    j["g_over_gc"] = params.g / gc;
    j["sw_validity"] = {{"valid", validity.valid}, {"margin", validity.margin}};
    j["xi"] = -xi.r();
    j["photon_number_closed_form"] = photon_number(xi);
    j["exact"] = {{"energy", exact.energy},
                  {"field_dim", exact.field_dim},
                  {"fidelity", exact.fidelity},
                  {"purity", exact.field_state.purity()},
                  {"mean_n_reduced", exact.field_state.mean_photon_number()},
                  {"mean_n_down_conditioned", exact.down_conditioned.mean_photon_number()},
                  {"down_conditioned_fidelity", exact.conditioned_fidelity},
                  {"qubit_up_population", exact.qubit_up_population}};
    j["effective"] = {{"energy", effective.energy},
                      {"energy_closed_form", effective_ground_energy(params)},
                      {"field_dim", effective.state.dim()},
                      {"mean_n", effective.state.mean_photon_number()},
                      {"fidelity", fidelity(effective.state, reference)}};

    io::CsvWriter csv({"n", "p_exact_reduced", "p_exact_down_conditioned", "p_effective", "p_closed_form"});
    const std::size_t levels = std::max({exact.field_dim, effective.state.dim(), reference.dim()});
    for (std::size_t n = 0; n < levels; ++n) {
        csv.row({static_cast<double>(n), exact.field_state.population(n), exact.down_conditioned.population(n),
                 effective.state.population(n), reference.population(n)});
    }

    return {{"ground_state.json", io::dump_json(j)},
            {"ground_state.csv", csv.str()},
            {resolved_config_name(), cfg.dump()}};
}

// ---------------------------------------------------------------------------
// figure1

struct Figure1Setup {
    SqueezeParameter xi;
    double omega = 1.0;
};

inline Figure1Setup read_figure1_setup(const Config& cfg) {
    Figure1Setup s;
    if (cfg.has("squeeze.r")) {
        s.xi = SqueezeParameter(cfg.get<double>("squeeze.r"), cfg.get_or<double>("squeeze.theta", kPi));
        s.omega = cfg.has("figure1.omega") ? cfg.get<double>("figure1.omega") : cfg.get_or<double>("rabi.omega", 1.0);
    } else if (cfg.has("rabi")) {
        const auto p = read_rabi(cfg);
        s.xi = squeezing_parameter(p);
        s.omega = cfg.get_or<double>("figure1.omega", p.omega);
    } else {
        throw Error(ErrorKind::ConfigError, "figure1 needs squeeze.r or a rabi block");
    }
    if (!(s.omega > 0.0)) throw Error(ErrorKind::ConfigError, "figure1 frequency must be > 0");
    return s;
}

inline OutputSet cmd_figure1(const Config& cfg) {
    const auto setup = read_figure1_setup(cfg);
    const auto trunc = cfg.truncation();
    const auto phases = cfg.get<std::vector<double>>("figure1.panel_phases");
    const auto points = cfg.get<std::size_t>("figure1.trace_points");
    if (points < 2) throw Error(ErrorKind::ConfigError, "figure1.trace_points must be >= 2");
    const GridSpec grid = default_grid_for_squeezing(setup.xi.r(), cfg.get<std::size_t>("figure1.grid_resolution"),
                                                     cfg.get<double>("figure1.grid_widths"));

    std::vector<double> trace_times;
    for (std::size_t k = 0; k < points; ++k) {
        trace_times.push_back(2.0 * kPi / setup.omega * static_cast<double>(k) / static_cast<double>(points - 1));
    }
    const auto trace = rotate_and_report(setup.xi, setup.omega, trace_times, grid, trunc, false);
    std::vector<double> panel_times;
    for (double ph : phases) panel_times.push_back(ph / setup.omega);
    const auto panels = rotate_and_report(setup.xi, setup.omega, panel_times, grid, trunc, true);

    io::CsvWriter csv({"t", "var_x", "var_p", "analytic_var_x", "analytic_var_p"});
    double max_err = 0.0;
    for (const auto& f : trace) {
        csv.row({f.t, f.numeric.var_x, f.numeric.var_p, f.analytic.var_x, f.analytic.var_p});
        max_err = std::max({max_err, std::abs(f.numeric.var_x - f.analytic.var_x), std::abs(f.numeric.var_p - f.analytic.var_p)});
    }

    nlohmann::json j;
    j["r"] = setup.xi.r();
    j["theta"] = setup.xi.theta();
    j["omega"] = setup.omega;
    j["max_variance_error"] = max_err;
    j["panels"] = nlohmann::json::array();
    double qmax = 0.0;
    for (const auto& f : panels) qmax = std::max(qmax, f.husimi.values.maxCoeff());
    for (const auto& f : panels) {
        const auto m = grid_moments(f.husimi);
        j["panels"].push_back({{"t", f.t},
                               {"grid_mass", f.husimi.mass()},
                               {"covariance", {m.covariance(0, 0), m.covariance(0, 1), m.covariance(1, 1)}},
                               {"anisotropy", m.anisotropy()},
                               {"major_axis_angle", std::atan2(m.major_axis()(1), m.major_axis()(0))},
                               {"var_x", f.numeric.var_x},
                               {"var_p", f.numeric.var_p}});
    }

    const double panel = 160.0, gap = 20.0, margin = 60.0;
    const double width = margin * 2 + static_cast<double>(panels.size()) * (panel + gap);
    svg::Document doc(width, 560);
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const double x = margin + static_cast<double>(k) * (panel + gap);
        doc.heatmap(x, 40, panel, panels[k].husimi.values, qmax);
        doc.text(x + panel / 2, 30, "wt = " + svg::num(panels[k].t * setup.omega));
    }
    std::vector<double> ts, vx, vp, ax, ap;
    for (const auto& f : trace) {
        ts.push_back(f.t);
        vx.push_back(f.numeric.var_x);
        vp.push_back(f.numeric.var_p);
        ax.push_back(f.analytic.var_x);
        ap.push_back(f.analytic.var_p);
    }
    doc.line_plot(margin, 260, width - 2 * margin, 240,
                  {{"var X", "#c0392b", ts, vx, false},
                   {"var P", "#2471a3", ts, vp, false},
                   {"closed form X", "#000000", ts, ax, true},
                   {"closed form P", "#555555", ts, ap, true}},
                  "t", "variance");

    return {{"figure1.svg", doc.str()},
            {"figure1_variances.csv", csv.str()},
            {"figure1_panels.json", io::dump_json(j)},
            {resolved_config_name(), cfg.dump()}};
}

// ---------------------------------------------------------------------------
// quench

inline OutputSet cmd_quench(const Config& cfg) {
    const RabiParams params = read_rabi(cfg);
    const auto trunc = cfg.truncation();
    const auto source_name = cfg.get<std::string>("quench.source");
    QuenchSource source;
    if (source_name == "effective") {
        source = QuenchSource::Effective;
    } else if (source_name == "exact") {
        source = QuenchSource::Exact;
    } else {
        throw Error(ErrorKind::ConfigError, "quench.source must be 'effective' or 'exact'");
    }
    const auto points = cfg.get<std::size_t>("quench.time_points");
    const double periods = cfg.get<double>("quench.periods");
    const auto durations = cfg.get<std::vector<double>>("quench.ramp_durations");
    const auto steps = cfg.get<std::size_t>("quench.ramp_steps");
    if (points < 2 || !(periods > 0.0)) throw Error(ErrorKind::ConfigError, "quench time grid is invalid");
    if (!durations.empty() && steps < 10) throw Error(ErrorKind::ConfigError, "quench.ramp_steps must be >= 10");

    std::vector<double> times;
    for (std::size_t k = 0; k < points; ++k) {
        times.push_back(periods * 2.0 * kPi / params.omega * static_cast<double>(k) / static_cast<double>(points - 1));
    }
    const auto result = run_quench(params, times, source, trunc);

    io::CsvWriter csv({"time", "n", "var_x", "var_p", "analytic_var_x", "analytic_var_p", "purity"});
    double n_min = 1e300, n_max = -1e300;
    for (const auto& s : result.trace) {
        csv.row({s.t, s.mean_n, s.variances.var_x, s.variances.var_p, s.analytic.var_x, s.analytic.var_p, s.purity});
        n_min = std::min(n_min, s.mean_n);
        n_max = std::max(n_max, s.mean_n);
    }

    io::CsvWriter ramp_csv({"duration", "steps", "final_n", "final_n_half_step", "relative_change"});
    nlohmann::json ramps = nlohmann::json::array();
    for (double d : durations) {
        const auto coarse = adiabatic_reference(params, d, steps, trunc);
        const auto fine = adiabatic_reference(params, d, 2 * steps, trunc);
        const double rel = fine.final_n > 0.0 ? std::abs(coarse.final_n - fine.final_n) / fine.final_n : 0.0;
        ramp_csv.row({d, static_cast<double>(steps), coarse.final_n, fine.final_n, rel});
        ramps.push_back({{"duration", d},
                         {"final_n", coarse.final_n},
                         {"final_n_half_step", fine.final_n},
                         {"converged", rel < 0.01},
                         {"fraction_of_sudden", photon_number(result.xi) > 0.0 ? coarse.final_n / photon_number(result.xi) : 0.0}});
    }

    nlohmann::json j;
    j["params"] = {{"omega", params.omega}, {"Omega", params.qubit_omega}, {"g", params.g}};
    j["source"] = source_name;
    j["sw_valid"] = result.sw_valid;
    j["xi"] = -result.xi.r();
    j["field_dim"] = result.field_dim;
    j["pre_quench_n"] = result.pre_quench_n;
    j["photon_number_closed_form"] = photon_number(result.xi);
    j["post_quench_n_min"] = n_min;
    j["post_quench_n_max"] = n_max;
    j["post_quench_n_spread"] = n_max - n_min;
    j["ramps"] = ramps;

    OutputSet out{{"quench.csv", csv.str()}, {"quench.json", io::dump_json(j)}, {resolved_config_name(), cfg.dump()}};
    if (!durations.empty()) out["quench_ramp.csv"] = ramp_csv.str();
    return out;
}

// ---------------------------------------------------------------------------
// spectrum-test

inline std::string spectrum_summary_text(const SpectrumComparison& c) {
    std::ostringstream s;
    s << "verdict: " << to_string(c.verdict) << "\n";
    s << "modes: " << c.frequencies.size() << "\n";
    s << "spearman correlation: " << io::format_number(c.correlation) << "\n";
    s << "chi2: " << io::format_number(c.chi2) << " (dof " << io::format_number(c.dof)
      << ", p = " << io::format_number(c.p_value) << ")\n";
    s << "max predicted excess / count SE: " << io::format_number(c.max_predicted_significance) << "\n";
    s << "dark rate subtracted: " << io::format_number(c.dark_rate_used) << "\n";
    return s.str();
}

inline svg::Document spectrum_figure(const SpectrumComparison& c) {
    svg::Document doc(720, 520);
    doc.bar_chart(70, 40, 600, 190, c.count_spectrum, c.count_se, "#2471a3", "excess photon counts per shot");
    doc.bar_chart(70, 290, 600, 190, c.fluctuation_spectrum, c.fluctuation_se, "#c0392b",
                  "fluctuation amplitude A(w) (max quadrature variance)");
    doc.text(370, 505, "mode frequency " + svg::num(c.frequencies.front()) + " .. " + svg::num(c.frequencies.back()) +
                           "   verdict: " + to_string(c.verdict));
    return doc;
}

inline OutputSet cmd_spectrum_test(const Config& cfg, unsigned threads = 1) {
    const auto spectrum = read_profile(cfg, "spectrum.profile");
    const bool scrambled = cfg.has("spectrum.counts_profile");
    const auto counts_spectrum = scrambled ? read_profile(cfg, "spectrum.counts_profile") : spectrum;
    const auto detector = read_detector(cfg);
    const auto compare_cfg = read_compare(cfg);
    const auto seed = read_seed(cfg);
    GenerationOptions opts;
    opts.time_bins = cfg.get<std::size_t>("spectrum.time_bins");
    opts.threads = threads;
    opts.keep_records = cfg.get<bool>("spectrum.write_records");
    if (counts_spectrum.frequencies != spectrum.frequencies) {
        throw Error(ErrorKind::AlignmentError, "counts_profile and profile use different frequency grids");
    }

    const auto data = generate_spectrum_data(spectrum, detector, seed, opts);
    const auto count_data = scrambled ? generate_spectrum_data(counts_spectrum, detector, seed, opts) : data;
    const auto cmp = compare_spectra(count_data.modes, data.modes, detector, compare_cfg);

    io::CsvWriter csv({"omega", "r_profile", "r_counts_profile", "mean_count", "excess_count", "count_se", "amplitude",
                       "amplitude_se", "predicted_count", "predicted_se"});
    for (std::size_t i = 0; i < cmp.frequencies.size(); ++i) {
        csv.row({cmp.frequencies[i], spectrum.r[i], counts_spectrum.r[i], count_data.modes[i].counts.mean,
                 cmp.count_spectrum[i], cmp.count_se[i], cmp.fluctuation_spectrum[i], cmp.fluctuation_se[i],
                 cmp.predicted_counts[i], cmp.predicted_se[i]});
    }

    nlohmann::json j;
    j["verdict"] = to_string(cmp.verdict);
    j["correlation"] = cmp.correlation;
    j["chi2"] = cmp.chi2;
    j["dof"] = cmp.dof;
    j["p_value"] = cmp.p_value;
    j["max_predicted_significance"] = cmp.max_predicted_significance;
    j["dark_rate_used"] = cmp.dark_rate_used;
    j["thresholds"] = {{"min_correlation", compare_cfg.min_correlation},
                       {"min_p_value", compare_cfg.min_p_value},
                       {"power_sigma", compare_cfg.power_sigma}};
    j["modes"] = cmp.frequencies.size();
    j["profile_kind"] = to_string(spectrum.kind);
    j["counts_profile_kind"] = to_string(counts_spectrum.kind);
    j["seed"] = seed;
    j["detector"] = io::to_json(detector);

    OutputSet out{{"spectrum.csv", csv.str()},
                  {"spectrum_report.json", io::dump_json(j)},
                  {"spectrum_summary.txt", spectrum_summary_text(cmp)},
                  {"figure2.svg", spectrum_figure(cmp).str()},
                  {resolved_config_name(), cfg.dump()}};
    if (opts.keep_records) {
        for (std::size_t i = 0; i < spectrum.size(); ++i) {
            const std::string stem = "records/mode" + std::to_string(i);
            out[stem + "_counts.csv"] = io::record_csv(count_data.count_records[i]);
            out[stem + "_counts.json"] = io::dump_json(io::record_sidecar(count_data.count_records[i]));
            out[stem + "_homodyne.csv"] = io::record_csv(data.homodyne_records[i]);
            out[stem + "_homodyne.json"] = io::dump_json(io::record_sidecar(data.homodyne_records[i]));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// selftest

struct SelfTestLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Quick internal consistency battery (a few seconds); the full acceptance
/// suite lives in the test tree.
inline std::vector<SelfTestLine> run_selftest() {
    std::vector<SelfTestLine> lines;
    const auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        lines.push_back({name, pass, detail});
    };

    {
        const auto a = annihilation(16);
        const CMatrix comm = (a * a.adjoint() - a.adjoint() * a).matrix();
        const double err = (comm.topLeftCorner(15, 15) - CMatrix::Identity(15, 15)).cwiseAbs().maxCoeff();
        check("commutator [a, a^dagger] = 1 below the edge", err < 1e-14, io::format_number(err));
    }
    {
        const auto xi = SqueezeParameter::rabi_convention(0.5);
        const double f = fidelity(squeezed_vacuum_operator(xi), squeezed_vacuum_fock_series(xi));
        check("operator vs Fock-series squeezed vacuum", 1.0 - f < 1e-10, io::format_number(1.0 - f));
    }
    {
        const auto xi = SqueezeParameter::rabi_convention(0.25 * std::log(1.25));
        const auto frames = rotate_and_report(xi, 1.0, {0.0, 0.4, 1.1, kPi / 2}, GridSpec{}, Truncation{}, false);
        double err = 0.0;
        for (const auto& f : frames) err = std::max(err, std::abs(f.numeric.var_x - f.analytic.var_x));
        check("rotating variances match closed form", err < 1e-8, io::format_number(err));
    }
    {
        const auto rep = exact_ground_field_state(RabiParams::from_ratio(1.0, 100.0, 0.3));
        check("exact Rabi vs squeezed vacuum fidelity", rep.fidelity >= 0.999, io::format_number(rep.fidelity));
    }
    {
        const auto xi = SqueezeParameter::rabi_convention(0.3);
        DetectorConfig det;
        det.shots = 20000;
        const auto rec = simulate_homodyne(xi, 1.0, period_times(1.0, 16), det, 7);
        const double r = xi_from_amplitude(estimate_fluctuation_amplitude(rec).amplitude).r;
        check("homodyne round trip r = 0.3", std::abs(r - 0.3) < 0.03, io::format_number(r));
    }
    return lines;
}

} // namespace sqvac::cli
