#pragma once

// File output helpers. Numbers are written with "%.17g" (round-trippable
// doubles); files are written to a temporary sibling and renamed into place.
//
// Matrix formats (golden files):
//   CSV    - one matrix row per line, entries as "re,im" pairs, so a row of
//            an n x n matrix has 2n comma-separated fields.
//   binary - "SQVM" magic, uint64 rows, uint64 cols (little-endian), then
//            rows*cols (re, im) double pairs in row-major order.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sqvac/error.hpp"
#include "sqvac/fock.hpp"
#include "sqvac/measurement.hpp"

namespace sqvac::io {

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Replaces `path` with `content` via write-to-temp-then-rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::ConfigError, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorKind::ConfigError, "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// RFC-4180-style CSV with a header row. Fields containing separators or
/// quotes are quoted.
class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) buf_ << ',';
            buf_ << format_number(values[i]);
        }
        buf_ << "\r\n";
    }

    void row_strings(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) buf_ << ',';
            buf_ << quote(fields[i]);
        }
        buf_ << "\r\n";
    }

    std::string str() const { return buf_.str(); }
    void save(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

private:
    static std::string quote(const std::string& f) {
        if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
        std::string q = "\"";
        for (char c : f) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }

    std::ostringstream buf_;
};

/// Serializes with a fixed key order (nlohmann::json sorts object keys) and
/// full-precision doubles.
inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Matrices

inline std::string matrix_to_csv(const CMatrix& m) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_number(m(i, j).real()) << ',' << format_number(m(i, j).imag());
        }
        out << "\n";
    }
    return out.str();
}

inline CMatrix matrix_from_csv(const std::string& text) {
    std::vector<std::vector<complex>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<double> vals;
        std::istringstream fields(line);
        std::string f;
        while (std::getline(fields, f, ',')) vals.push_back(std::stod(f));
        if (vals.size() % 2 != 0) throw Error(ErrorKind::ConfigError, "matrix CSV row has an odd field count");
        std::vector<complex> row;
        for (std::size_t k = 0; k < vals.size(); k += 2) row.emplace_back(vals[k], vals[k + 1]);
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw Error(ErrorKind::ConfigError, "matrix CSV rows differ in length");
        }
        rows.push_back(std::move(row));
    }
    CMatrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

inline std::uint64_t get_u64(const std::string& in, std::size_t pos) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
    return v;
}

inline void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    put_u64(out, bits);
}

inline double get_f64(const std::string& in, std::size_t pos) {
    const std::uint64_t bits = get_u64(in, pos);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

} // namespace detail

inline std::string matrix_to_binary(const CMatrix& m) {
    std::string out = "SQVM";
    detail::put_u64(out, static_cast<std::uint64_t>(m.rows()));
    detail::put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            detail::put_f64(out, m(i, j).real());
            detail::put_f64(out, m(i, j).imag());
        }
    }
    return out;
}

inline CMatrix matrix_from_binary(const std::string& in) {
    if (in.size() < 20 || in.compare(0, 4, "SQVM") != 0) throw Error(ErrorKind::ConfigError, "not an SQVM matrix blob");
    const auto rows = detail::get_u64(in, 4);
    const auto cols = detail::get_u64(in, 12);
    if (in.size() != 20 + rows * cols * 16) throw Error(ErrorKind::ConfigError, "SQVM blob has the wrong length");
    CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::size_t pos = 20;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j, pos += 16) {
            m(i, j) = complex(detail::get_f64(in, pos), detail::get_f64(in, pos + 8));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Measurement records: one CSV row per sample plus a JSON sidecar.

inline nlohmann::json to_json(const DetectorConfig& d) {
    return {{"efficiency", d.efficiency},
            {"dark_rate", d.dark_rate},
            {"shots", d.shots},
            {"electronic_noise", d.electronic_noise}};
}

inline std::string record_csv(const MeasurementRecord& rec) {
    if (rec.kind == RecordKind::PhotonCount) {
        CsvWriter csv({"shot", "count"});
        for (std::size_t s = 0; s < rec.counts.size(); ++s) {
            csv.row({static_cast<double>(s), static_cast<double>(rec.counts[s])});
        }
        return csv.str();
    }
    CsvWriter csv({"bin", "t", "shot", "x"});
    const std::size_t shots = rec.times.empty() ? 0 : rec.quadratures.size() / rec.times.size();
    for (std::size_t b = 0; b < rec.times.size(); ++b) {
        for (std::size_t s = 0; s < shots; ++s) {
            csv.row({static_cast<double>(b), rec.times[b], static_cast<double>(s), rec.quadratures[b * shots + s]});
        }
    }
    return csv.str();
}

inline nlohmann::json record_sidecar(const MeasurementRecord& rec) {
    return {{"kind", rec.kind == RecordKind::PhotonCount ? "photon-count" : "homodyne"},
            {"mode_frequency", rec.mode_frequency},
            {"mode_index", rec.mode_index},
            {"seed", rec.seed},
            {"seed_schema", "mt19937_64 per 4096-shot block, seed = derive(master, mode_index, stream, time_bin, block)"},
            {"detector", to_json(rec.detector)},
            {"samples", rec.sample_count()},
            {"times", rec.times}};
}

inline void save_record(const MeasurementRecord& rec, const std::filesystem::path& stem) {
    auto csv = stem;
    csv += ".csv";
    auto json = stem;
    json += ".json";
    write_file_atomic(csv, record_csv(rec));
    write_file_atomic(json, dump_json(record_sidecar(rec)));
}

} // namespace sqvac::io
