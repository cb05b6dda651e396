#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "gbest/bench.hpp"
#include "gbest/error.hpp"
#include "gbest/eval.hpp"

namespace gbest {

struct PlotOptions {
    enum class Interval { quantile, standard_error };
    // quantile: whiskers at q05/q95 (simulation figures); standard_error:
    // mean +/- 1.96 se (real-data cross-validation figures).
    Interval interval = Interval::quantile;
    std::string title = "Integrated Brier Score";
    std::string value_label = "IBS";
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string svg_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace detail

// Render the per-model mean and interval chart as a self-contained SVG:
// one point per model group at the mean, a vertical whisker for the interval,
// labeled axes and an embedded legend. Deterministic for fixed input.
inline std::string render_ci_plot(const std::vector<ResultRow>& rows, const PlotOptions& options = {}) {
    struct Group {
        std::string label;
        std::vector<double> values;
    };
    std::vector<Group> groups;
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
        if (!r.error.empty() || !std::isfinite(r.ibs)) continue;
        const std::string key = ModelSpec{r.model, r.prior_weight}.key();
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, groups.size());
            groups.push_back({key, {}});
            it = index.find(key);
        }
        groups[it->second].values.push_back(r.ibs);
    }
    if (groups.empty()) throw Error("render_ci_plot: no plottable rows");

    struct Mark {
        std::string label;
        double mean, lo, hi;
    };
    std::vector<Mark> marks;
    for (const auto& g : groups) {
        const auto stats = summarize(g.values);
        if (options.interval == PlotOptions::Interval::quantile) {
            marks.push_back({g.label, stats.mean, stats.q05, stats.q95});
        } else {
            const double se = stats.sd / std::sqrt(static_cast<double>(g.values.size()));
            marks.push_back({g.label, stats.mean, stats.mean - 1.96 * se, stats.mean + 1.96 * se});
        }
    }

    double lo = marks.front().lo, hi = marks.front().hi;
    for (const auto& m : marks) {
        lo = std::min(lo, m.lo);
        hi = std::max(hi, m.hi);
    }
    if (hi <= lo) {
        lo -= 0.05;
        hi += 0.05;
    }
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double width = 720.0, height = 440.0;
    const double margin_left = 70.0, margin_right = 20.0, margin_top = 48.0, margin_bottom = 96.0;
    const double plot_w = width - margin_left - margin_right;
    const double plot_h = height - margin_top - margin_bottom;
    auto y_of = [&](double v) { return margin_top + plot_h * (1.0 - (v - lo) / (hi - lo)); };
    auto x_of = [&](std::size_t i) {
        return margin_left + plot_w * (static_cast<double>(i) + 0.5) / static_cast<double>(marks.size());
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) + "\" height=\"" +
           detail::svg_num(height) + "\" viewBox=\"0 0 " + detail::svg_num(width) + " " +
           detail::svg_num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::svg_num(width / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           detail::xml_escape(options.title) + "</text>\n";

    // axes
    svg += "<line x1=\"" + detail::svg_num(margin_left) + "\" y1=\"" + detail::svg_num(margin_top) +
           "\" x2=\"" + detail::svg_num(margin_left) + "\" y2=\"" + detail::svg_num(margin_top + plot_h) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::svg_num(margin_left) + "\" y1=\"" + detail::svg_num(margin_top + plot_h) +
           "\" x2=\"" + detail::svg_num(margin_left + plot_w) + "\" y2=\"" +
           detail::svg_num(margin_top + plot_h) + "\" stroke=\"black\"/>\n";

    // y ticks
    for (int t = 0; t <= 5; ++t) {
        const double v = lo + (hi - lo) * static_cast<double>(t) / 5.0;
        const double y = y_of(v);
        svg += "<line x1=\"" + detail::svg_num(margin_left - 4) + "\" y1=\"" + detail::svg_num(y) + "\" x2=\"" +
               detail::svg_num(margin_left) + "\" y2=\"" + detail::svg_num(y) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(margin_left - 8) + "\" y=\"" + detail::svg_num(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + detail::tick_label(v) +
               "</text>\n";
    }
    svg += "<text transform=\"rotate(-90 16 " + detail::svg_num(margin_top + plot_h / 2) + ")\" x=\"16\" y=\"" +
           detail::svg_num(margin_top + plot_h / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           detail::xml_escape(options.value_label) + "</text>\n";

    // marks
    for (std::size_t i = 0; i < marks.size(); ++i) {
        const auto& m = marks[i];
        const double x = x_of(i);
        svg += "<line x1=\"" + detail::svg_num(x) + "\" y1=\"" + detail::svg_num(y_of(m.lo)) + "\" x2=\"" +
               detail::svg_num(x) + "\" y2=\"" + detail::svg_num(y_of(m.hi)) +
               "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
        for (double v : {m.lo, m.hi})
            svg += "<line x1=\"" + detail::svg_num(x - 6) + "\" y1=\"" + detail::svg_num(y_of(v)) + "\" x2=\"" +
                   detail::svg_num(x + 6) + "\" y2=\"" + detail::svg_num(y_of(v)) +
                   "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
        svg += "<circle cx=\"" + detail::svg_num(x) + "\" cy=\"" + detail::svg_num(y_of(m.mean)) +
               "\" r=\"4\" fill=\"firebrick\"/>\n";
        svg += "<text transform=\"rotate(-30 " + detail::svg_num(x) + " " +
               detail::svg_num(margin_top + plot_h + 16) + ")\" x=\"" + detail::svg_num(x) + "\" y=\"" +
               detail::svg_num(margin_top + plot_h + 16) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::xml_escape(m.label) + "</text>\n";
    }

    // legend
    const double lx = margin_left + plot_w - 190.0, ly = margin_top + 8.0;
    svg += "<rect x=\"" + detail::svg_num(lx) + "\" y=\"" + detail::svg_num(ly) +
           "\" width=\"182\" height=\"40\" fill=\"white\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    svg += "<circle cx=\"" + detail::svg_num(lx + 12) + "\" cy=\"" + detail::svg_num(ly + 13) +
           "\" r=\"4\" fill=\"firebrick\"/>\n";
    svg += "<text x=\"" + detail::svg_num(lx + 22) + "\" y=\"" + detail::svg_num(ly + 17) +
           "\" font-family=\"sans-serif\" font-size=\"11\">mean</text>\n";
    svg += "<line x1=\"" + detail::svg_num(lx + 12) + "\" y1=\"" + detail::svg_num(ly + 24) + "\" x2=\"" +
           detail::svg_num(lx + 12) + "\" y2=\"" + detail::svg_num(ly + 34) +
           "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::svg_num(lx + 22) + "\" y=\"" + detail::svg_num(ly + 32) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           (options.interval == PlotOptions::Interval::quantile ? "q05&#8211;q95 interval"
                                                                : "mean &#177; 1.96 se") +
           "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace gbest
