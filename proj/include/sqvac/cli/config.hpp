#pragma once

// Run configuration: YAML files (comments allowed, nested keys) merged over a
// single versioned defaults table. The merged result, minus execution-only
// settings (output directory, thread count), is the "resolved config" every
// command writes next to its outputs; re-running from it reproduces the
// outputs byte for byte.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "sqvac/error.hpp"
#include "sqvac/fock.hpp"

namespace sqvac::cli {

inline constexpr const char* kDefaultsVersion = "sqvac-defaults/1";

/// Every default lives here. Keys without a default (rabi.*, squeeze.r,
/// spectrum.profile) are required by the commands that use them.
inline YAML::Node defaults_table() {
    return YAML::Load(R"(
defaults_version: sqvac-defaults/1
seed: 1
truncation:
  start_dim: 32
  max_dim: 2048
  tail_tolerance: 1.0e-10
figure1:
  panel_phases: [0.0, 0.39269908169872414, 0.78539816339744828, 1.1780972450961724, 1.5707963267948966]
  trace_points: 64
  grid_resolution: 201
  grid_widths: 4.0
quench:
  source: effective
  time_points: 100
  periods: 2.0
  ramp_durations: [1.0, 10.0, 100.0, 1000.0]
  ramp_steps: 10000
detector:
  efficiency: 1.0
  dark_rate: 0.001
  shots: 100000
  electronic_noise: 0.0
spectrum:
  grid:
    lo: 1.0
    hi: 4.0
    modes: 32
  time_bins: 16
  write_records: false
  compare:
    min_correlation: 0.8
    min_p_value: 0.05
    power_sigma: 3.0
    dark_subtraction: known
    reference_modes: []
)");
}

namespace detail {

inline YAML::Node merge(const YAML::Node& base, const YAML::Node& over) {
    if (!over.IsDefined() || over.IsNull()) return YAML::Clone(base);
    if (!base.IsDefined() || !base.IsMap() || !over.IsMap()) return YAML::Clone(over);
    YAML::Node out = YAML::Clone(base);
    for (const auto& kv : over) {
        const auto key = kv.first.as<std::string>();
        out[key] = merge(base[key], kv.second);
    }
    return out;
}

} // namespace detail

class Config {
public:
    Config() : root_(defaults_table()) {}
    explicit Config(YAML::Node root) : root_(std::move(root)) {}

    static Config from_yaml(const std::string& text) {
        YAML::Node user;
        try {
            user = YAML::Load(text);
        } catch (const YAML::Exception& e) {
            throw Error(ErrorKind::ConfigError, std::string("config parse error: ") + e.what());
        }
        if (user.IsDefined() && !user.IsNull() && !user.IsMap()) {
            throw Error(ErrorKind::ConfigError, "config root must be a mapping");
        }
        return Config(detail::merge(defaults_table(), user));
    }

    static Config from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::ConfigError, "cannot read config " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        return from_yaml(buf.str());
    }

    bool has(const std::string& dotted) const { return lookup(dotted).IsDefined() && !lookup(dotted).IsNull(); }

    template <class T>
    T get(const std::string& dotted) const {
        const YAML::Node n = lookup(dotted);
        if (!n.IsDefined() || n.IsNull()) throw Error(ErrorKind::ConfigError, "missing required field '" + dotted + "'");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw Error(ErrorKind::ConfigError, "field '" + dotted + "' has the wrong type");
        }
    }

    template <class T>
    T get_or(const std::string& dotted, T fallback) const {
        return has(dotted) ? get<T>(dotted) : fallback;
    }

    void set(const std::string& dotted, const YAML::Node& value) { set_in(root_, split(dotted), 0, value); }

    const YAML::Node& root() const { return root_; }

    Truncation truncation() const {
        Truncation t;
        t.start_dim = get<std::size_t>("truncation.start_dim");
        t.max_dim = get<std::size_t>("truncation.max_dim");
        t.tail_tolerance = get<double>("truncation.tail_tolerance");
        if (t.start_dim < 2 || t.max_dim < t.start_dim || !(t.tail_tolerance > 0.0)) {
            throw Error(ErrorKind::ConfigError, "invalid truncation block");
        }
        return t;
    }

    /// Full-precision YAML with a fixed key order (that of the merged tree).
    std::string dump() const {
        YAML::Emitter out;
        out.SetDoublePrecision(17);
        out << root_;
        return std::string(out.c_str()) + "\n";
    }

private:
    static std::vector<std::string> split(const std::string& dotted) {
        std::vector<std::string> parts;
        std::stringstream ss(dotted);
        std::string p;
        while (std::getline(ss, p, '.')) parts.push_back(p);
        return parts;
    }

    static void set_in(YAML::Node node, const std::vector<std::string>& parts, std::size_t i, const YAML::Node& value) {
        if (i + 1 == parts.size()) {
            node[parts[i]] = value;
            return;
        }
        if (!node[parts[i]].IsMap()) node[parts[i]] = YAML::Node(YAML::NodeType::Map);
        set_in(node[parts[i]], parts, i + 1, value);
    }

    YAML::Node lookup(const std::string& dotted) const {
        YAML::Node n;
        n.reset(root_);
        for (const auto& p : split(dotted)) {
            if (!n.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
            const YAML::Node& cn = n;
            const YAML::Node next = cn[p];
            if (!next.IsDefined()) return YAML::Node(YAML::NodeType::Undefined);
            n.reset(next);
        }
        return n;
    }

    YAML::Node root_;
};

} // namespace sqvac::cli
