#include "beals/decay.hpp"

#include <cmath>
#include <limits>

#include "beals/common.hpp"

namespace beals {

ShellFit fit_shell_decay(const std::vector<double>& shell_max, int lo, int hi, double floor) {
  ShellFit fit;
  fit.lo = std::max(lo, 0);
  fit.hi = std::min(hi, static_cast<int>(shell_max.size()) - 1);
  std::vector<double> xs, ys;
  for (int k = fit.lo; k <= fit.hi; ++k) {
    if (shell_max[k] <= floor) {
      fit.floor_reached = true;
      fit.floor_shell = k;
      break;
    }
    xs.push_back(std::log(bracket(k)));
    ys.push_back(std::log(shell_max[k]));
  }
  fit.used = static_cast<int>(xs.size());
  if (fit.used < 2) {
    fit.exponent = fit.floor_reached ? std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::quiet_NaN();
    fit.constant = fit.used == 1 ? std::exp(ys[0]) : 0.0;
    return fit;
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < fit.used; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= fit.used;
  my /= fit.used;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < fit.used; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.exponent = -sxy / sxx;
  for (int i = 0; i < fit.used; ++i) fit.constant = std::max(fit.constant, std::exp(ys[i] + fit.exponent * xs[i]));
  return fit;
}

std::vector<double> envelope_constants(const std::vector<double>& shell_max, int max_power) {
  std::vector<double> c(max_power + 1, 0.0);
  for (int n = 0; n <= max_power; ++n)
    for (std::size_t k = 0; k < shell_max.size(); ++k)
      c[n] = std::max(c[n], shell_max[k] * std::pow(bracket(static_cast<double>(k)), n));
  return c;
}

}  // namespace beals
