#include "sosim/colors.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace sosim::colors {

namespace {
constexpr std::array<std::pair<std::string_view, double>, 16> kNamed{{
    {"black", kBlack},   {"gray", kGray},   {"white", kWhite},         {"red", kRed},
    {"orange", kOrange}, {"brown", kBrown}, {"yellow", kYellow},       {"green", kGreen},
    {"lime", kLime},     {"cyan", kCyan},   {"turquoise", kTurquoise}, {"sky", kSky},
    {"blue", kBlue},     {"violet", kViolet}, {"magenta", kMagenta},   {"pink", kPink},
}};

constexpr std::array<double, 13> kDistinct{kRed,  kBlue,      kYellow, kGreen,   kOrange,
                                           kCyan, kMagenta,   kViolet, kPink,    kLime,
                                           kBrown, kSky,      kTurquoise};
}  // namespace

double normalize(double color) {
  double c = std::fmod(color, 140.0);
  if (c < 0) c += 140.0;
  if (c >= 140.0) c = 0.0;
  return c;
}

std::optional<double> by_name(std::string_view name) {
  for (const auto& [n, v] : kNamed)
    if (n == name) return v;
  return std::nullopt;
}

std::span<const double> distinct_palette() { return kDistinct; }

}  // namespace sosim::colors
