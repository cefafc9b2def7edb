#pragma once

#include <vector>

namespace beals {

/// Gauss-Legendre rule mapped to [0, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n);
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Cached rule lookup; thread safe.
const GaussLegendre& gauss_legendre(int n);

}  // namespace beals
