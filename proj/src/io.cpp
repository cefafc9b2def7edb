#include "beals/io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>

namespace beals {

namespace {

constexpr char kMagic[8] = {'B', 'E', 'A', 'L', 'S', 'A', 'R', 'R'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("truncated array file " + path);
  return v;
}

void put_values(std::ostream& os, const Complex* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(Complex)));
}

void get_values(std::istream& is, Complex* p, std::size_t n, const std::string& path) {
  if (!is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(Complex))))
    throw Error("truncated array file " + path);
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw Error("cannot write " + path);
  return os;
}

void put_header(std::ostream& os, ArrayKind kind, int d, bool magnetic) {
  os.write(kMagic, 8);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(kind));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  put<std::uint32_t>(os, magnetic ? 1u : 0u);
}

std::pair<int, bool> get_header(std::istream& is, ArrayKind kind, const std::string& path) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error(path + " is not a beals array file");
  if (get<std::uint32_t>(is, path) != kVersion) throw Error(path + ": unsupported array file version");
  if (get<std::uint32_t>(is, path) != static_cast<std::uint32_t>(kind)) throw Error(path + ": wrong array kind");
  const auto d = get<std::uint32_t>(is, path);
  if (d < 1 || d > kMaxDim) throw DimensionError(path + ": bad dimension in header");
  return {static_cast<int>(d), get<std::uint32_t>(is, path) != 0};
}

}  // namespace

void write_kernel(const std::string& path, const OperatorKernel& K) {
  auto os = open_out(path, std::ios::binary);
  put_header(os, ArrayKind::Kernel, K.grid.dim, K.magnetic);
  put<double>(os, K.grid.L);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(K.grid.N));
  put_values(os, K.K.data(), static_cast<std::size_t>(K.K.size()));
}

OperatorKernel read_kernel(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  const auto [d, magnetic] = get_header(is, ArrayKind::Kernel, path);
  const double L = get<double>(is, path);
  const int N = static_cast<int>(get<std::uint32_t>(is, path));
  Grid grid(d, L, N);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd K(n, n);
  get_values(is, K.data(), static_cast<std::size_t>(K.size()), path);
  OperatorKernel out(grid, std::move(K));
  out.magnetic = magnetic;
  return out;
}

void write_matrix_elements(const std::string& path, const MatrixElements& M) {
  auto os = open_out(path, std::ios::binary);
  const auto& idx = M.index();
  put_header(os, ArrayKind::MatrixElements, idx.dim, M.magnetic());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(idx.Gamma));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(idx.M));
  put<std::uint64_t>(os, M.block_count());
  M.for_each_block([&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& b) {
    put<std::uint64_t>(os, g);
    put<std::uint64_t>(os, gp);
    put_values(os, b.data(), static_cast<std::size_t>(b.size()));
  });
}

MatrixElements read_matrix_elements(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  const auto [d, magnetic] = get_header(is, ArrayKind::MatrixElements, path);
  const int Gamma = static_cast<int>(get<std::uint32_t>(is, path));
  const int Mm = static_cast<int>(get<std::uint32_t>(is, path));
  MatrixElements M(FrameIndexSet(d, Gamma, Mm), magnetic);
  const auto count = get<std::uint64_t>(is, path);
  const auto nm = static_cast<Eigen::Index>(M.index().modulation_count());
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto g = get<std::uint64_t>(is, path), gp = get<std::uint64_t>(is, path);
    if (g >= M.index().gamma_count() || gp >= M.index().gamma_count()) throw Error(path + ": block index out of range");
    Eigen::MatrixXcd b(nm, nm);
    get_values(is, b.data(), static_cast<std::size_t>(b.size()), path);
    M.set_block(g, gp, std::move(b));
  }
  return M;
}

void write_symbol_csv(const std::string& path, const Symbol& a) {
  auto os = open_out(path);
  const int d = a.grid.dim;
  for (int k = 0; k < d; ++k) os << "t" << k + 1 << ",";
  for (int k = 0; k < d; ++k) os << "xi" << k + 1 << ",";
  os << "re,im\n" << std::setprecision(17);
  for (std::size_t i = 0; i < a.grid.t_count(); ++i) {
    const Point t = a.grid.t_point(i);
    for (std::size_t j = 0; j < a.grid.xi_count(); ++j) {
      const Point xi = a.grid.xi_point(j);
      for (int k = 0; k < d; ++k) os << t[k] << ",";
      for (int k = 0; k < d; ++k) os << xi[k] << ",";
      const Complex v = a.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      os << v.real() << "," << v.imag() << "\n";
    }
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto os = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n" << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
}

}  // namespace beals
