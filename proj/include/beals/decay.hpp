#pragma once

#include <vector>

namespace beals {

/// Least-squares fit of log(shell max) against log<k> on shells [lo, hi].
struct ShellFit {
  double exponent = 0.0;   // fitted N in amp ~ C <k>^{-N}; +inf when the floor is hit before two shells
  double constant = 0.0;   // max_k amp_k <k>^N over the fitted shells
  int lo = 0;
  int hi = 0;
  int used = 0;            // shells that entered the fit
  bool floor_reached = false;
  int floor_shell = -1;    // first shell at or below the floor
};

ShellFit fit_shell_decay(const std::vector<double>& shell_max, int lo, int hi, double floor);

/// C_N = max_k amp_k <k>^N for N = 0..max_power.
std::vector<double> envelope_constants(const std::vector<double>& shell_max, int max_power);

}  // namespace beals
