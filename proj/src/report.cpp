#include "ssl_lab/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ssllab {

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double map(double v) const { return log ? std::log10(v) : v; }
    double frac(double v) const { return (map(v) - map(lo)) / (map(hi) - map(lo)); }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
                const double t = std::pow(10.0, e);
                if (t >= lo * (1 - 1e-12) && t <= hi * (1 + 1e-12)) out.push_back(t);
            }
            if (out.size() < 2) out = {lo, hi};
            return out;
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        }
        for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
            out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
        }
        return out;
    }
};

Axis fit_axis(const std::vector<double>& values, bool log) {
    Axis axis;
    axis.log = log;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v) || (log && v <= 0.0)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) {
        lo = log ? 0.1 : 0.0;
        hi = 1.0;
    }
    if (lo == hi) {
        if (log) {
            lo /= 2.0;
            hi *= 2.0;
        } else {
            const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
            lo -= pad;
            hi += pad;
        }
    } else if (!log) {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    axis.lo = lo;
    axis.hi = hi;
    return axis;
}

}  // namespace

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default:
                if (static_cast<unsigned char>(c) >= 0x20 || c == '\n' || c == '\t') out += c;
        }
    }
    return out;
}

std::string render_line_chart(const std::vector<Series>& series, const ChartSpec& spec) {
    std::vector<double> xs, ys;
    for (const Series& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.name + "': x/y length mismatch");
        if ((!s.lo.empty() && s.lo.size() != s.y.size()) || (!s.hi.empty() && s.hi.size() != s.y.size())) {
            throw std::invalid_argument("series '" + s.name + "': band length mismatch");
        }
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
        ys.insert(ys.end(), s.lo.begin(), s.lo.end());
        ys.insert(ys.end(), s.hi.begin(), s.hi.end());
    }
    const Axis ax = fit_axis(xs, spec.log_x);
    const Axis ay = fit_axis(ys, spec.log_y);

    const double left = 70, right = 150, top = 40, bottom = 55;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;
    auto px = [&](double x) { return left + ax.frac(x) * pw; };
    auto py = [&](double y) { return top + (1.0 - ay.frac(y)) * ph; };
    auto shown_x = [&](double x) { return std::isfinite(x) && (!spec.log_x || x > 0.0); };
    auto shown_y = [&](double y) { return std::isfinite(y) && (!spec.log_y || y > 0.0); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << xml_escape(spec.title) << "</text>\n";

    svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (double t : ax.ticks()) {
        svg << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(t)) << "\" y2=\""
            << num(top + ph) << "\"/>\n";
    }
    for (double t : ay.ticks()) {
        svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left + pw) << "\" y2=\""
            << num(py(t)) << "\"/>\n";
    }
    svg << "</g>\n";
    svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks()) {
        svg << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">"
            << tick_label(t) << "</text>\n";
    }
    for (double t : ay.ticks()) {
        svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
            << tick_label(t) << "</text>\n";
    }
    svg << "<text class=\"x-label\" x=\"" << num(left + pw / 2) << "\" y=\"" << num(spec.height - 12)
        << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << (spec.log_x ? " (log)" : "") << "</text>\n";
    svg << "<text class=\"y-label\" x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(top + ph / 2) << ")\">" << xml_escape(spec.y_label) << (spec.log_y ? " (log)" : "") << "</text>\n";

    svg << "<defs><clipPath id=\"plot\"><rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
        << "\" height=\"" << num(ph) << "\"/></clipPath></defs>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        const char* color = kPalette[k % kPalette.size()];
        svg << "<g class=\"series\" data-name=\"" << xml_escape(s.name) << "\" clip-path=\"url(#plot)\">\n";
        if (!s.lo.empty() && !s.hi.empty()) {
            std::ostringstream upper, lower;
            std::size_t count = 0;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                const double lo = spec.log_y ? std::max(s.lo[i], ay.lo) : s.lo[i];
                if (!shown_x(s.x[i]) || !shown_y(s.hi[i]) || !shown_y(lo)) continue;
                upper << num(px(s.x[i])) << ',' << num(py(s.hi[i])) << ' ';
                lower.str(num(px(s.x[i])) + "," + num(py(lo)) + " " + lower.str());
                ++count;
            }
            if (count >= 2) {
                svg << "<polygon points=\"" << upper.str() << lower.str() << "\" fill=\"" << color
                    << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
            }
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (shown_x(s.x[i]) && shown_y(s.y[i])) svg << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        }
        svg << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (shown_x(s.x[i]) && shown_y(s.y[i])) {
                svg << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\""
                    << color << "\"/>\n";
            }
        }
        svg << "</g>\n";
        const double ly = top + 14 + 18 * static_cast<double>(k);
        svg << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(left + pw + 32)
            << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text class=\"legend\" x=\"" << num(left + pw + 38) << "\" y=\"" << num(ly) << "\">"
            << xml_escape(s.name) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string_view metric_label(Metric metric) noexcept {
    switch (metric) {
        case Metric::Excess: return "excess risk";
        case Metric::Estimation: return "estimation error";
        case Metric::TestError: return "test error";
    }
    return "?";
}

std::vector<Series> sweep_series(const SweepResult& sweep, Metric metric) {
    std::vector<Series> out;
    if (sweep.cells.empty()) return out;
    for (const MethodStats& first : sweep.cells.front().methods) {
        Series s;
        s.name = std::string(method_name(first.method));
        for (std::size_t c = 0; c < sweep.cells.size(); ++c) {
            const MethodStats& st = sweep.stats(c, first.method);
            const double mean = cell_mean(st, metric);
            const double sd = metric == Metric::Excess       ? st.std_excess
                              : metric == Metric::Estimation ? st.std_estimation
                                                             : st.std_test_error;
            s.x.push_back(sweep.cells[c].axis_value);
            s.y.push_back(mean);
            s.lo.push_back(mean - sd);
            s.hi.push_back(mean + sd);
        }
        out.push_back(std::move(s));
    }
    return out;
}

Series gap_series(const SweepResult& sweep, Method a, Method b, Metric metric) {
    Series s;
    s.name = std::string(method_name(a)) + " - " + std::string(method_name(b));
    s.x = sweep.grid();
    s.y = error_gap(sweep, a, b, metric);
    return s;
}

}  // namespace ssllab
