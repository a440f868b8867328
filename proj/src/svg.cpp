#include "commute/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace commute::svg {

namespace {

std::string f2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    // avoid the two spellings of zero
    if (std::string(buf) == "-0.00") return "0.00";
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Round a raw interval to pleasant tick spacing.
double nice_step(double span) {
    double raw = span / 8.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double frac = raw / mag;
    double nice = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
    return nice * mag;
}

} // namespace

std::string render_plot(std::span<const Series> series, std::span<const Guide> guides,
                        std::span<const Annotation> annotations, const PlotSpec& spec) {
    if (series.empty()) throw std::domain_error("render_plot: no series");

    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    bool first = true;
    auto take = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y))
            throw std::domain_error("render_plot: non-finite value");
        if (first) {
            x_lo = x_hi = x;
            y_lo = y_hi = y;
            first = false;
        } else {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    };
    for (const auto& s : series) {
        if (s.points.empty()) throw std::domain_error("render_plot: empty series");
        for (const auto& [x, y] : s.points) take(x, y);
    }
    for (const auto& g : guides) take(x_lo, g.level);
    if (x_lo == x_hi) {
        x_lo -= 1;
        x_hi += 1;
    }
    if (y_lo == y_hi) {
        y_lo -= 1;
        y_hi += 1;
    }
    double y_pad = 0.06 * (y_hi - y_lo);
    y_lo -= y_pad;
    y_hi += y_pad;

    const double ml = 70, mr = 170, mt = 42, mb = 52;
    const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) { return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << spec.width
       << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << ' '
       << spec.height << "\">\n";
    os << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
       << "\" fill=\"#ffffff\"/>\n";
    if (!spec.title.empty())
        os << "<text x=\"" << f2(spec.width / 2.0)
           << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
           << xml_escape(spec.title) << "</text>\n";

    // axes and ticks
    os << "<g stroke=\"#444444\" stroke-width=\"1\">\n";
    os << "<line x1=\"" << f2(ml) << "\" y1=\"" << f2(mt + ph) << "\" x2=\"" << f2(ml + pw)
       << "\" y2=\"" << f2(mt + ph) << "\"/>\n";
    os << "<line x1=\"" << f2(ml) << "\" y1=\"" << f2(mt) << "\" x2=\"" << f2(ml) << "\" y2=\""
       << f2(mt + ph) << "\"/>\n";
    os << "</g>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">\n";
    double xs = nice_step(x_hi - x_lo);
    for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-9; t += xs) {
        os << "<line x1=\"" << f2(px(t)) << "\" y1=\"" << f2(mt + ph) << "\" x2=\"" << f2(px(t))
           << "\" y2=\"" << f2(mt + ph + 4) << "\" stroke=\"#444444\"/>\n";
        os << "<text x=\"" << f2(px(t)) << "\" y=\"" << f2(mt + ph + 16)
           << "\" text-anchor=\"middle\">" << f2(t) << "</text>\n";
    }
    double ys = nice_step(y_hi - y_lo);
    for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-9; t += ys) {
        os << "<line x1=\"" << f2(ml - 4) << "\" y1=\"" << f2(py(t)) << "\" x2=\"" << f2(ml)
           << "\" y2=\"" << f2(py(t)) << "\" stroke=\"#444444\"/>\n";
        os << "<text x=\"" << f2(ml - 7) << "\" y=\"" << f2(py(t) + 4)
           << "\" text-anchor=\"end\">" << f2(t) << "</text>\n";
    }
    os << "</g>\n";
    if (!spec.x_label.empty())
        os << "<text x=\"" << f2(ml + pw / 2) << "\" y=\"" << f2(spec.height - 12.0)
           << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
           << xml_escape(spec.x_label) << "</text>\n";
    if (!spec.y_label.empty())
        os << "<text x=\"16\" y=\"" << f2(mt + ph / 2)
           << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
              "transform=\"rotate(-90 16 "
           << f2(mt + ph / 2) << ")\">" << xml_escape(spec.y_label) << "</text>\n";

    for (const auto& g : guides) {
        os << "<line x1=\"" << f2(ml) << "\" y1=\"" << f2(py(g.level)) << "\" x2=\"" << f2(ml + pw)
           << "\" y2=\"" << f2(py(g.level))
           << "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"6,3\"/>\n";
        os << "<text x=\"" << f2(ml + pw + 6) << "\" y=\"" << f2(py(g.level) + 4)
           << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">"
           << xml_escape(g.label) << "</text>\n";
    }

    int li = 0;
    for (const auto& s : series) {
        if (s.points.size() == 1) {
            const auto& [x, y] = s.points.front();
            os << "<circle cx=\"" << f2(px(x)) << "\" cy=\"" << f2(py(y)) << "\" r=\"3\" fill=\""
               << s.color << "\"/>\n";
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
            if (s.dashed) os << " stroke-dasharray=\"4,3\"";
            os << " points=\"";
            for (const auto& [x, y] : s.points) os << f2(px(x)) << ',' << f2(py(y)) << ' ';
            os << "\"/>\n";
        }
        double ly = mt + 14.0 * (li + 1);
        os << "<line x1=\"" << f2(ml + pw + 6) << "\" y1=\"" << f2(ly - 4) << "\" x2=\""
           << f2(ml + pw + 26) << "\" y2=\"" << f2(ly - 4) << "\" stroke=\"" << s.color
           << "\" stroke-width=\"2\"";
        if (s.dashed) os << " stroke-dasharray=\"4,3\"";
        os << "/>\n";
        os << "<text x=\"" << f2(ml + pw + 30) << "\" y=\"" << f2(ly)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.label)
           << "</text>\n";
        ++li;
    }

    for (const auto& a : annotations) {
        os << "<circle cx=\"" << f2(px(a.x)) << "\" cy=\"" << f2(py(a.y))
           << "\" r=\"3.5\" fill=\"#000000\"/>\n";
        os << "<text x=\"" << f2(px(a.x) + 6) << "\" y=\"" << f2(py(a.y) - 6)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(a.label)
           << "</text>\n";
    }

    os << "</svg>\n";
    return os.str();
}

std::string series_csv(std::span<const Series> series) {
    std::ostringstream os;
    os << "series,x,y\n";
    for (const auto& s : series) {
        std::string label = s.label;
        bool quote = label.find_first_of(",\"\n") != std::string::npos;
        if (quote) {
            std::string q = "\"";
            for (char c : label) {
                if (c == '"') q += '"';
                q += c;
            }
            q += '"';
            label = q;
        }
        for (const auto& [x, y] : s.points) os << label << ',' << f2(x) << ',' << f2(y) << '\n';
    }
    return os.str();
}

} // namespace commute::svg
