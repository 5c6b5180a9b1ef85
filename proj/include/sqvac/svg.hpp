#pragma once

// Minimal SVG emitter for the figure commands. Output contains no
// timestamps or generator metadata, so identical inputs give identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sqvac::svg {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

/// Sequential white-to-dark-blue ramp for t in [0, 1].
inline std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255.0 * (1.0 - 0.85 * t)));
    const int g = static_cast<int>(std::lround(255.0 * (1.0 - 0.7 * t)));
    const int b = static_cast<int>(std::lround(255.0 * (1.0 - 0.35 * t)));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

class Document {
public:
    Document(double width, double height) : width_(width), height_(height) {}

    void text(double x, double y, const std::string& s, double size = 12, const std::string& anchor = "middle") {
        body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
              << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "none") {
        body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
              << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }

    /// Heatmap of `values` (rows = x index, cols = y index, y increasing upward),
    /// block-averaged to at most `max_pixels` per axis.
    void heatmap(double x, double y, double size, const Eigen::MatrixXd& values, double vmax,
                 std::size_t max_pixels = 100) {
        const auto n = static_cast<std::size_t>(values.rows());
        const std::size_t block = std::max<std::size_t>(1, (n + max_pixels - 1) / max_pixels);
        const std::size_t pixels = (n + block - 1) / block;
        const double px = size / static_cast<double>(pixels);
        for (std::size_t i = 0; i < pixels; ++i) {
            for (std::size_t j = 0; j < pixels; ++j) {
                double sum = 0.0;
                std::size_t cnt = 0;
                for (std::size_t a = i * block; a < std::min(n, (i + 1) * block); ++a) {
                    for (std::size_t b = j * block; b < std::min(n, (j + 1) * block); ++b) {
                        sum += values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                        ++cnt;
                    }
                }
                const double v = cnt ? sum / static_cast<double>(cnt) : 0.0;
                rect(x + px * static_cast<double>(i), y + size - px * static_cast<double>(j + 1), px * 1.02, px * 1.02,
                     ramp_color(vmax > 0.0 ? v / vmax : 0.0));
            }
        }
        rect(x, y, size, size, "none", "#444444");
    }

    /// Line plot in the box (x, y, w, h) with data ranges derived from the series.
    void line_plot(double x, double y, double w, double h, const std::vector<Series>& series,
                   const std::string& xlabel, const std::string& ylabel) {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& s : series) {
            for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
            for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
        }
        if (!(xmax > xmin)) xmax = xmin + 1.0;
        const double pad = (ymax - ymin) * 0.08 + 1e-12;
        ymin -= pad;
        ymax += pad;
        rect(x, y, w, h, "none", "#444444");
        for (const auto& s : series) {
            body_ << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
            if (s.dashed) body_ << " stroke-dasharray=\"5,3\"";
            body_ << " points=\"";
            for (std::size_t k = 0; k < s.x.size(); ++k) {
                const double px = x + w * (s.x[k] - xmin) / (xmax - xmin);
                const double py = y + h - h * (s.y[k] - ymin) / (ymax - ymin);
                body_ << num(px) << ',' << num(py) << ' ';
            }
            body_ << "\"/>\n";
        }
        text(x + w / 2, y + h + 28, xlabel);
        text(x - 36, y + h / 2, ylabel, 12, "middle");
        text(x, y + h + 14, num(xmin), 10, "start");
        text(x + w, y + h + 14, num(xmax), 10, "end");
        text(x - 4, y + h, num(ymin), 10, "end");
        text(x - 4, y + 10, num(ymax), 10, "end");
        double ly = y + 14;
        for (const auto& s : series) {
            text(x + w - 6, ly, s.label, 10, "end");
            rect(x + w - 6 - 7.0 * static_cast<double>(s.label.size()) - 18, ly - 8, 12, 3, s.color);
            ly += 14;
        }
    }

    /// Bar chart of `values` over categories, optionally with error bars.
    void bar_chart(double x, double y, double w, double h, const std::vector<double>& values,
                   const std::vector<double>& errors, const std::string& color, const std::string& title) {
        double vmax = 0.0, vmin = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double e = k < errors.size() ? errors[k] : 0.0;
            vmax = std::max(vmax, values[k] + e);
            vmin = std::min(vmin, values[k] - e);
        }
        if (!(vmax > vmin)) vmax = vmin + 1.0;
        rect(x, y, w, h, "none", "#444444");
        const double bw = w / static_cast<double>(std::max<std::size_t>(1, values.size()));
        const auto to_y = [&](double v) { return y + h - h * (v - vmin) / (vmax - vmin); };
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double top = to_y(std::max(values[k], 0.0));
            const double bottom = to_y(std::min(values[k], 0.0));
            rect(x + bw * static_cast<double>(k) + bw * 0.1, top, bw * 0.8, bottom - top, color);
            if (k < errors.size() && errors[k] > 0.0) {
                const double cx = x + bw * (static_cast<double>(k) + 0.5);
                body_ << "<line x1=\"" << num(cx) << "\" x2=\"" << num(cx) << "\" y1=\"" << num(to_y(values[k] - errors[k]))
                      << "\" y2=\"" << num(to_y(values[k] + errors[k])) << "\" stroke=\"#222222\"/>\n";
            }
        }
        text(x + w / 2, y - 8, title);
        text(x - 4, y + 10, num(vmax), 10, "end");
        text(x - 4, y + h, num(vmin), 10, "end");
    }

    std::string str() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
            << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\">\n"
            << "<rect x=\"0\" y=\"0\" width=\"" << num(width_) << "\" height=\"" << num(height_) << "\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

private:
    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
            }
        }
        return out;
    }

    double width_;
    double height_;
    std::ostringstream body_;
};

} // namespace sqvac::svg
