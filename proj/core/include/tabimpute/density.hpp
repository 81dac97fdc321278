#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tabimpute {

inline constexpr std::size_t kDensityPoints = 128;

/// Silverman's rule: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling back to
/// the sd and then to 1 when the spread is zero.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian kernel density estimate of `values` at each abscissa.
std::vector<double> gaussian_kde(std::span<const double> values, std::span<const double> abscissae, double bandwidth);

/// Two densities on a shared, evenly spaced grid covering both samples
/// plus three bandwidths on either side.
struct DensityCurve {
    std::vector<double> abscissae;
    std::vector<double> reference;
    std::vector<double> candidate;
};

DensityCurve density_curve(std::span<const double> reference, std::span<const double> candidate,
                           std::size_t points = kDensityPoints);

/// Minimal standalone SVG line plot of both curves.
std::string render_density_svg(const DensityCurve& curve, std::string_view title, std::string_view reference_label,
                               std::string_view candidate_label);

} // namespace tabimpute
