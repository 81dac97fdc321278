#include "tabimpute/density.hpp"
#include "tabimpute/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace tabimpute {

namespace {

double quantile(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

double silverman_bandwidth(std::span<const double> values) {
    if (values.empty()) throw DataError("bandwidth of an empty sample");
    const auto n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);

    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) return 1.0;
    return 0.9 * spread * std::pow(n, -0.2);
}

std::vector<double> gaussian_kde(std::span<const double> values, std::span<const double> abscissae, double bandwidth) {
    if (values.empty()) throw DataError("density of an empty sample");
    const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out;
    out.reserve(abscissae.size());
    for (double x : abscissae) {
        double total = 0.0;
        for (double v : values) {
            const double z = (x - v) / bandwidth;
            total += std::exp(-0.5 * z * z);
        }
        out.push_back(total * norm);
    }
    return out;
}

DensityCurve density_curve(std::span<const double> reference, std::span<const double> candidate, std::size_t points) {
    if (points < 2) throw DataError("a density curve needs at least two points");
    const double h_ref = silverman_bandwidth(reference);
    const double h_cand = silverman_bandwidth(candidate);
    const double pad = 3.0 * std::max(h_ref, h_cand);
    const auto [rmin, rmax] = std::minmax_element(reference.begin(), reference.end());
    const auto [cmin, cmax] = std::minmax_element(candidate.begin(), candidate.end());
    const double lo = std::min(*rmin, *cmin) - pad;
    const double hi = std::max(*rmax, *cmax) + pad;

    DensityCurve curve;
    curve.abscissae.resize(points);
    for (std::size_t i = 0; i < points; ++i)
        curve.abscissae[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    curve.reference = gaussian_kde(reference, curve.abscissae, h_ref);
    curve.candidate = gaussian_kde(candidate, curve.abscissae, h_cand);
    return curve;
}

std::string render_density_svg(const DensityCurve& curve, std::string_view title, std::string_view reference_label,
                               std::string_view candidate_label) {
    constexpr double width = 480.0;
    constexpr double height = 320.0;
    constexpr double margin = 40.0;
    const double x0 = curve.abscissae.front();
    const double x1 = curve.abscissae.back();
    double ymax = 0.0;
    for (double v : curve.reference) ymax = std::max(ymax, v);
    for (double v : curve.candidate) ymax = std::max(ymax, v);
    if (!(ymax > 0.0)) ymax = 1.0;

    auto polyline = [&](const std::vector<double>& ys, std::string_view colour) {
        std::string pts;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double px = margin + (curve.abscissae[i] - x0) / (x1 - x0) * (width - 2 * margin);
            const double py = height - margin - ys[i] / ymax * (height - 2 * margin);
            pts += fmt::format("{:.2f},{:.2f} ", px, py);
        }
        return fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour, pts);
    };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{3}</text>\n"
        "<line x1=\"{2}\" y1=\"{4}\" x2=\"{5}\" y2=\"{4}\" stroke=\"black\"/>\n"
        "<line x1=\"{2}\" y1=\"{2}\" x2=\"{2}\" y2=\"{4}\" stroke=\"black\"/>\n",
        width, height, margin, escape_xml(title), height - margin, width - margin);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{:.4g}</text>\n", margin,
                       height - margin + 14, x0);
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.4g}</text>\n",
        width - margin, height - margin + 14, x1);
    svg += polyline(curve.reference, "#1f77b4");
    svg += polyline(curve.candidate, "#d62728");
    svg += fmt::format("<text x=\"{}\" y=\"36\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#1f77b4\">{}</text>\n",
                       width - 160, escape_xml(reference_label));
    svg += fmt::format("<text x=\"{}\" y=\"50\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">{}</text>\n",
                       width - 160, escape_xml(candidate_label));
    svg += "</svg>\n";
    return svg;
}

} // namespace tabimpute
