#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lsldg/common.hpp"

namespace lsldg::cli {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

void write_curve_svg(const std::filesystem::path& path,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label,
                     const std::vector<std::string>& x_ticks,
                     const std::vector<double>& means,
                     const std::vector<double>& errors) {
    require(!means.empty() && means.size() == x_ticks.size() &&
                means.size() == errors.size(),
            "curve inputs have mismatched lengths");

    const double width = 640, height = 420;
    const double left = 70, right = 20, top = 40, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double lo = 0.0, hi = 0.0;  // keep the zero line in view
    for (std::size_t i = 0; i < means.size(); ++i) {
        lo = std::min(lo, means[i] - errors[i]);
        hi = std::max(hi, means[i] + errors[i]);
    }
    const double pad = 0.08 * std::max(hi - lo, 1e-12);
    lo -= pad;
    hi += pad;

    auto px = [&](std::size_t i) {
        if (means.size() == 1) return left + plot_w / 2;
        return left + plot_w * static_cast<double>(i) / (means.size() - 1);
    };
    auto py = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

    std::ofstream out(path);
    require(out.good(), "cannot write file: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // frame and zero line
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << num(py(0.0)) << "\" x2=\""
        << left + plot_w << "\" y2=\"" << num(py(0.0))
        << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";

    // y ticks
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4;
        out << "<line x1=\"" << left - 4 << "\" y1=\"" << num(py(v)) << "\" x2=\""
            << left << "\" y2=\"" << num(py(v)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << num(py(v) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << short_num(v) << "</text>\n";
    }

    // x ticks
    for (std::size_t i = 0; i < x_ticks.size(); ++i) {
        out << "<line x1=\"" << num(px(i)) << "\" y1=\"" << top + plot_h
            << "\" x2=\"" << num(px(i)) << "\" y2=\"" << top + plot_h + 4
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(px(i)) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << x_ticks[i] << "</text>\n";
    }

    // error bars
    for (std::size_t i = 0; i < means.size(); ++i) {
        const double x = px(i);
        out << "<line x1=\"" << num(x) << "\" y1=\""
            << num(py(means[i] - errors[i])) << "\" x2=\"" << num(x)
            << "\" y2=\"" << num(py(means[i] + errors[i]))
            << "\" stroke=\"#d62728\"/>\n";
    }

    // polyline through the means
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
           "points=\"";
    for (std::size_t i = 0; i < means.size(); ++i)
        out << num(px(i)) << ',' << num(py(means[i])) << ' ';
    out << "\"/>\n";
    for (std::size_t i = 0; i < means.size(); ++i)
        out << "<circle cx=\"" << num(px(i)) << "\" cy=\"" << num(py(means[i]))
            << "\" r=\"3\" fill=\"#1f77b4\"/>\n";

    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">"
        << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18 "
        << top + plot_h / 2 << ")\">" << y_label << "</text>\n";
    out << "</svg>\n";
    require(out.good(), "write failed: " + path.string());
}

}  // namespace lsldg::cli
