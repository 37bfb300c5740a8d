#pragma once
// Minimal SVG plotter for trajectory panels: polyline series, vertical
// shading bands, linear 1-2-5 tick axes, stacked panels. Every coordinate is
// written with fixed precision, so identical data renders to identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace pdmp::svg {

struct Series {
    std::vector<double> xs, ys;
    std::string color = "#1f77b4";
    double width = 1.2;
    double opacity = 1.0;
};

struct Band {
    double x0 = 0.0, x1 = 0.0;
};

struct Panel {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    std::vector<Band> bands;  // vertical shading, e.g. spells in one environment
    std::string band_color = "#dce9f7";
};

struct Layout {
    int panel_w = 720, panel_h = 250;
    int margin_l = 72, margin_r = 20, margin_t = 32, margin_b = 48;
};

namespace detail {

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string label(double v) {
    if (v == 0.0) v = 0.0;  // avoid "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    double raw = span / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (raw <= f * mag * (1.0 + 1e-12)) return f * mag;
    return 10.0 * mag;
}

struct Range {
    double lo = 0.0, hi = 1.0;

    void widen(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

}  // namespace detail

inline void render(std::ostream& os, const std::vector<Panel>& panels, const Layout& L = {}) {
    using detail::px;
    int width = L.margin_l + L.panel_w + L.margin_r;
    int cell_h = L.margin_t + L.panel_h + L.margin_b;
    int height = cell_h * static_cast<int>(panels.size());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
       << "\" fill=\"#ffffff\"/>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const Panel& panel = panels[p];
        double top = cell_h * static_cast<double>(p) + L.margin_t;
        double left = L.margin_l;

        detail::Range rx, ry;
        bool any = false;
        for (const Series& s : panel.series)
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
                if (!any) {
                    rx = {s.xs[i], s.xs[i]};
                    ry = {s.ys[i], s.ys[i]};
                    any = true;
                } else {
                    rx.widen(s.xs[i]);
                    ry.widen(s.ys[i]);
                }
            }
        if (!any) {
            rx = {0.0, 1.0};
            ry = {0.0, 1.0};
        }
        if (rx.hi <= rx.lo) rx.hi = rx.lo + 1.0;
        double pad = 0.04 * (ry.hi - ry.lo);
        if (pad <= 0.0) pad = std::max(1.0, std::abs(ry.hi)) * 0.1;
        ry.lo -= pad;
        ry.hi += pad;

        auto X = [&](double v) { return left + (v - rx.lo) / (rx.hi - rx.lo) * L.panel_w; };
        auto Y = [&](double v) {
            return top + L.panel_h - (v - ry.lo) / (ry.hi - ry.lo) * L.panel_h;
        };

        std::string clip_id = "panel" + std::to_string(p);
        os << "<clipPath id=\"" << clip_id << "\"><rect x=\"" << px(left) << "\" y=\"" << px(top)
           << "\" width=\"" << L.panel_w << "\" height=\"" << L.panel_h << "\"/></clipPath>\n";
        os << "<g clip-path=\"url(#" << clip_id << ")\">\n";
        for (const Band& b : panel.bands) {
            double x0 = std::max(b.x0, rx.lo), x1 = std::min(b.x1, rx.hi);
            if (!(x1 > x0)) continue;
            os << "<rect x=\"" << px(X(x0)) << "\" y=\"" << px(top) << "\" width=\""
               << px(X(x1) - X(x0)) << "\" height=\"" << L.panel_h << "\" fill=\""
               << panel.band_color << "\"/>\n";
        }
        for (const Series& s : panel.series) {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
               << px(s.width) << "\"";
            if (s.opacity < 1.0) os << " stroke-opacity=\"" << px(s.opacity) << "\"";
            os << " points=\"";
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
                if (i) os << " ";
                os << px(X(s.xs[i])) << "," << px(Y(s.ys[i]));
            }
            os << "\"/>\n";
        }
        os << "</g>\n";

        os << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << L.panel_w
           << "\" height=\"" << L.panel_h
           << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

        double xstep = detail::nice_step(rx.hi - rx.lo, 6);
        for (double v = std::ceil(rx.lo / xstep) * xstep; v <= rx.hi + 1e-9 * xstep;
             v += xstep) {
            os << "<line x1=\"" << px(X(v)) << "\" y1=\"" << px(top + L.panel_h) << "\" x2=\""
               << px(X(v)) << "\" y2=\"" << px(top + L.panel_h + 5) << "\" stroke=\"#333333\""
               << " stroke-width=\"1\"/>\n";
            os << "<text x=\"" << px(X(v)) << "\" y=\"" << px(top + L.panel_h + 18)
               << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
               << detail::label(v) << "</text>\n";
        }
        double ystep = detail::nice_step(ry.hi - ry.lo, 5);
        for (double v = std::ceil(ry.lo / ystep) * ystep; v <= ry.hi + 1e-9 * ystep;
             v += ystep) {
            os << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(Y(v)) << "\" x2=\""
               << px(left) << "\" y2=\"" << px(Y(v)) << "\" stroke=\"#333333\""
               << " stroke-width=\"1\"/>\n";
            os << "<text x=\"" << px(left - 8) << "\" y=\"" << px(Y(v) + 3.5)
               << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
               << detail::label(v) << "</text>\n";
        }

        if (!panel.title.empty())
            os << "<text x=\"" << px(left) << "\" y=\"" << px(top - 10)
               << "\" font-family=\"monospace\" font-size=\"13\">" << panel.title << "</text>\n";
        if (!panel.xlabel.empty())
            os << "<text x=\"" << px(left + L.panel_w / 2.0) << "\" y=\""
               << px(top + L.panel_h + 36)
               << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">"
               << panel.xlabel << "</text>\n";
        if (!panel.ylabel.empty())
            os << "<text x=\"" << px(left - 48) << "\" y=\"" << px(top + L.panel_h / 2.0)
               << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\""
               << " transform=\"rotate(-90 " << px(left - 48) << " " << px(top + L.panel_h / 2.0)
               << ")\">" << panel.ylabel << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace pdmp::svg
