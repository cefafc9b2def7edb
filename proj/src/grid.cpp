#include "beals/grid.hpp"

namespace beals {

Grid::Grid(int dim_, double L_, int N_) : dim(dim_), L(L_), N(N_) {
  if (dim < 1 || dim > kMaxDim) throw DimensionError("grid dimension must be in [1, 3]");
  if (!(L > 0.0) || !std::isfinite(L)) throw GridError("grid half width must be positive");
  if (N < 2) throw GridError("grid needs at least 2 points per axis");
}

Grid Grid::commensurate(int dim, double min_half_width, int M) {
  if (M < 0) throw GridError("modulation truncation must be non-negative");
  const double h = kTwoPi / (2 * M + 1);
  const int N = 2 * static_cast<int>(std::ceil(min_half_width / h));
  return Grid(dim, 0.5 * N * h, N);
}

bool Grid::commensurate_with(int M) const { return std::abs((2 * M + 1) * h() - kTwoPi) < 1e-12; }

std::array<int, kMaxDim> Grid::unflatten(std::size_t flat) const {
  std::array<int, kMaxDim> idx{};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % N);
    flat /= N;
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<int, kMaxDim>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * N + idx[a];
  return flat;
}

Point Grid::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Point x(dim);
  for (int a = 0; a < dim; ++a) x[a] = coord(idx[a]);
  return x;
}

GridFunction::GridFunction(Grid grid) : grid_(grid), values_(Eigen::VectorXcd::Zero(grid.size())) {}

GridFunction::GridFunction(Grid grid, Eigen::VectorXcd values) : grid_(grid), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.size())
    throw DimensionError("grid function sample count does not match grid");
}

GridFunction GridFunction::from_function(const Grid& grid, const std::function<Complex(const Point&)>& f) {
  GridFunction out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.point(i));
  return out;
}

double GridFunction::norm() const { return std::sqrt(grid_.weight()) * values_.norm(); }

Complex GridFunction::inner(const GridFunction& other) const {
  if (!(grid_ == other.grid_)) throw DimensionError("inner product of functions on different grids");
  return grid_.weight() * values_.dot(other.values_);
}

double GridFunction::edge_magnitude() const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const auto idx = grid_.unflatten(i);
    bool edge = false;
    for (int a = 0; a < grid_.dim; ++a) edge = edge || idx[a] == 0 || idx[a] == grid_.N - 1;
    if (edge) m = std::max(m, std::abs(values_[static_cast<Eigen::Index>(i)]));
  }
  return m;
}

}  // namespace beals
