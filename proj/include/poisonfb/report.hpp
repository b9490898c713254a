#pragma once

// CSV and SVG artifacts for ScenarioResult.

#include "poisonfb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace poisonfb::experiments {

inline constexpr const char* csv_header = "scenario,x,curve,mean,stderr,outage_frac,trials,seed";

namespace detail {

inline std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

inline void finish(std::ofstream& f, const std::string& path)
{
    f.flush();
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

inline std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep))
        out.push_back(cell);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s)
{
    if (s == "nan")
        return std::nan("");
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
        throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

} // namespace detail

inline std::string results_csv(const ScenarioResult& r)
{
    std::string out = csv_header;
    out += '\n';
    for (std::size_t xi = 0; xi < r.xs.size(); ++xi)
        for (std::size_t c = 0; c < r.curves.size(); ++c) {
            const Aggregate& a = r.points[xi][c];
            out += std::string(to_string(r.figure)) + ',' + detail::fmt(r.xs[xi]) + ',' + r.curves[c] + ',' +
                   detail::fmt(a.mean) + ',' + detail::fmt(a.stderr_) + ',' + detail::fmt(a.outage_frac) + ',' +
                   std::to_string(r.trials) + ',' + std::to_string(r.seed) + '\n';
        }
    return out;
}

/// One row per (x, curve); see csv_header.
inline void write_results(const ScenarioResult& r, const std::string& path)
{
    auto f = detail::open_out(path);
    f << results_csv(r);
    detail::finish(f, path);
}

/// Per-trial log, including the attacker's predicted vs realized objective.
inline void write_trials(const ScenarioResult& r, const std::string& path)
{
    auto f = detail::open_out(path);
    f << "x,trial";
    for (const auto& c : r.curves)
        f << ',' << c;
    f << ",attack_predicted,attack_realized\n";
    for (const auto& t : r.records) {
        f << detail::fmt(t.x) << ',' << t.trial;
        for (std::size_t c = 0; c < t.values.size(); ++c)
            f << ',' << (t.outage[c] ? std::string("outage") : detail::fmt(t.values[c]));
        f << ',' << detail::fmt(t.attack_predicted) << ',' << detail::fmt(t.attack_realized) << '\n';
    }
    detail::finish(f, path);
}

/// Inverse of write_results. Per-trial records are not recovered.
inline ScenarioResult read_results(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != csv_header)
        throw std::runtime_error(path + ": missing or unexpected CSV header");

    ScenarioResult r;
    bool first = true;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != 8)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 8 fields");
        try {
            const auto fig = parse_figure(cells[0]);
            if (!fig)
                throw std::invalid_argument("unknown scenario '" + cells[0] + "'");
            if (first) {
                r.figure = *fig;
                r.trials = std::stoi(cells[6]);
                r.seed = std::stoull(cells[7]);
                first = false;
            } else if (*fig != r.figure) {
                throw std::invalid_argument("mixed scenarios");
            }
            const double x = detail::parse_double(cells[1]);
            if (r.xs.empty() || r.xs.back() != x) {
                r.xs.push_back(x);
                r.points.emplace_back();
            }
            const std::size_t ci = r.points.back().size();
            if (r.xs.size() == 1)
                r.curves.push_back(cells[2]);
            else if (ci >= r.curves.size() || r.curves[ci] != cells[2])
                throw std::invalid_argument("curve order differs between x values");
            Aggregate a;
            a.mean = detail::parse_double(cells[3]);
            a.stderr_ = detail::parse_double(cells[4]);
            a.outage_frac = detail::parse_double(cells[5]);
            a.ok = static_cast<int>(std::lround((1.0 - a.outage_frac) * r.trials));
            r.points.back().push_back(a);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (r.xs.empty())
        throw std::runtime_error(path + ": no data rows");
    for (const auto& p : r.points)
        if (p.size() != r.curves.size())
            throw std::runtime_error(path + ": ragged curve set");
    return r;
}

/// Value drawn on the y axis: dB for avgsnr, the stored mean otherwise.
inline double plotted_value(Figure f, double mean) { return f == Figure::avgsnr ? linear_to_db(mean) : mean; }

inline std::string render_svg(const ScenarioResult& r)
{
    if (r.xs.empty() || r.curves.empty())
        throw std::invalid_argument("render_plot: empty result");
    constexpr double w = 640, h = 420, ml = 70, mr = 150, mt = 40, mb = 55;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    double ylo = std::numeric_limits<double>::infinity();
    double yhi = -ylo;
    for (const auto& p : r.points)
        for (const auto& a : p)
            if (std::isfinite(a.mean) && (r.figure != Figure::avgsnr || a.mean > 0.0)) {
                const double y = plotted_value(r.figure, a.mean);
                ylo = std::min(ylo, y);
                yhi = std::max(yhi, y);
            }
    if (!std::isfinite(ylo)) {
        ylo = 0.0;
        yhi = 1.0;
    }
    if (r.figure == Figure::txpower || r.figure == Figure::minrate)
        ylo = std::min(ylo, 0.0);
    if (yhi - ylo < 1e-12)
        yhi = ylo + 1.0;
    const double pad = 0.05 * (yhi - ylo);
    ylo -= r.figure == Figure::avgsnr ? pad : 0.0;
    yhi += pad;
    double xlo = r.xs.front();
    double xhi = r.xs.back();
    if (xhi - xlo < 1e-12) {
        xlo -= 1.0;
        xhi += 1.0;
    }
    auto px = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ylo) / (yhi - ylo) * (h - mt - mb); };

    const char* xlabel = r.figure == Figure::avgsnr ? "Transmit power P (dB)" : "Number of receivers K";
    const char* ylabel = r.figure == Figure::txpower  ? "Transmit power fraction"
                         : r.figure == Figure::avgsnr ? "Average SNR (dB)"
                                                      : "Minimum rate (bits/s/Hz)";

    std::ostringstream s;
    s.imbue(std::locale::classic());
    s.precision(6);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<!-- scenario=" << to_string(r.figure) << " trials=" << r.trials << " seed=" << r.seed << " config=";
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.config_hash));
    s << hash << " -->\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << (ml + (w - ml - mr) / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << to_string(r.figure) << " (" << r.trials << " trials, seed " << r.seed << ")</text>\n";
    s << "<line x1=\"" << ml << "\" y1=\"" << (h - mb) << "\" x2=\"" << (w - mr) << "\" y2=\"" << (h - mb)
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << (h - mb)
      << "\" stroke=\"black\"/>\n";
    for (double x : r.xs)
        s << "<text x=\"" << px(x) << "\" y=\"" << (h - mb + 16) << "\" text-anchor=\"middle\">" << detail::fmt(x)
          << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        const double y = ylo + (yhi - ylo) * i / 5.0;
        char lab[32];
        std::snprintf(lab, sizeof lab, "%.3g", y);
        s << "<text x=\"" << (ml - 6) << "\" y=\"" << (py(y) + 4) << "\" text-anchor=\"end\">" << lab << "</text>\n";
        s << "<line x1=\"" << ml << "\" y1=\"" << py(y) << "\" x2=\"" << (w - mr) << "\" y2=\"" << py(y)
          << "\" stroke=\"#ddd\"/>\n";
    }
    s << "<text x=\"" << (ml + (w - ml - mr) / 2) << "\" y=\"" << (h - 12) << "\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
    s << "<text transform=\"translate(18," << (mt + (h - mt - mb) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << ylabel << "</text>\n";

    for (std::size_t c = 0; c < r.curves.size(); ++c) {
        const char* color = colors[c % 5];
        s << "<g class=\"series\" data-curve=\"" << r.curves[c] << "\">\n<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
        std::string markers;
        for (std::size_t xi = 0; xi < r.xs.size(); ++xi) {
            const double m = r.points[xi][c].mean;
            if (!std::isfinite(m) || (r.figure == Figure::avgsnr && !(m > 0.0)))
                continue;
            const double y = plotted_value(r.figure, m);
            std::ostringstream pt;
            pt.imbue(std::locale::classic());
            pt.precision(6);
            pt << px(r.xs[xi]) << ',' << py(y);
            s << pt.str() << ' ';
            std::ostringstream mk;
            mk.imbue(std::locale::classic());
            mk.precision(6);
            mk << "<circle cx=\"" << px(r.xs[xi]) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
               << "\" data-y=\"" << detail::fmt(y) << "\"/>\n";
            markers += mk.str();
        }
        s << "\"/>\n" << markers << "</g>\n";
        const double ly = mt + 10 + 20.0 * static_cast<double>(c);
        s << "<line x1=\"" << (w - mr + 12) << "\" y1=\"" << ly << "\" x2=\"" << (w - mr + 36) << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << (w - mr + 42) << "\" y=\"" << (ly + 4) << "\">" << r.curves[c] << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

/// SVG line chart, one series per curve.
inline void render_plot(const ScenarioResult& r, const std::string& path)
{
    const std::string svg = render_svg(r);
    auto f = detail::open_out(path);
    f << svg;
    detail::finish(f, path);
}

} // namespace poisonfb::experiments
