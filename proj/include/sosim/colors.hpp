#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace sosim::colors {

// Logo palette: colors are reals in [0, 140), ten shades per hue.
inline constexpr double kBlack = 0.0;
inline constexpr double kGray = 5.0;
inline constexpr double kWhite = 9.9;
inline constexpr double kRed = 15.0;
inline constexpr double kOrange = 25.0;
inline constexpr double kBrown = 35.0;
inline constexpr double kYellow = 45.0;
inline constexpr double kGreen = 55.0;
inline constexpr double kLime = 65.0;
inline constexpr double kTurquoise = 75.0;
inline constexpr double kCyan = 85.0;
inline constexpr double kSky = 95.0;
inline constexpr double kBlue = 105.0;
inline constexpr double kViolet = 115.0;
inline constexpr double kMagenta = 125.0;
inline constexpr double kPink = 135.0;

/// Wraps any real into [0, 140).
double normalize(double color);

std::optional<double> by_name(std::string_view name);

/// Distinct hues handed out to towers and cluster heads, in order.
std::span<const double> distinct_palette();

}  // namespace sosim::colors
