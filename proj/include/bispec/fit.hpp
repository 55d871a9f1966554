#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "bispec/error.hpp"

namespace bispec {

struct PowerLawFit {
  double slope = 0.0;      // empirical exponent
  double intercept = 0.0;  // log C
  double r_squared = 0.0;
};

/// Least-squares line through (log m, log value).
inline PowerLawFit fit_growth_exponent(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 4, "fit_growth_exponent needs at least 4 points");
  std::vector<double> x, y;
  for (const auto& [m, c] : points) {
    require(m > 0.0 && c > 0.0 && std::isfinite(m) && std::isfinite(c),
            "fit_growth_exponent needs positive finite points");
    x.push_back(std::log(m));
    y.push_back(std::log(c));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "fit_growth_exponent needs at least two distinct abscissae");
  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

inline PowerLawFit fit_growth_exponent(const std::vector<std::pair<double, double>>& points) {
  return fit_growth_exponent(std::span<const std::pair<double, double>>(points));
}

}  // namespace bispec
