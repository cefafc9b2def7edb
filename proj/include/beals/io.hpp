#pragma once

#include <string>
#include <vector>

#include "beals/matrix_elements.hpp"
#include "beals/symbol.hpp"
#include "beals/weyl.hpp"

namespace beals {

/// Binary array files: 8-byte magic, u32 version, u32 kind, u32 d, u32 magnetic flag,
/// kind-specific header, then little-endian complex doubles.
///   kernel            f64 L, u32 N, then N^d x N^d values, column-major
///   matrix elements   u32 Gamma, u32 M, u64 block count, then per block u64 gamma, u64 gamma', values
enum class ArrayKind : std::uint32_t { Kernel = 1, MatrixElements = 2 };

void write_kernel(const std::string& path, const OperatorKernel& K);
/// The phase function is not stored; a magnetic kernel comes back with magnetic = true and no phase.
OperatorKernel read_kernel(const std::string& path);

void write_matrix_elements(const std::string& path, const MatrixElements& M);
MatrixElements read_matrix_elements(const std::string& path);

/// Columns t_1..t_d, xi_1..xi_d, re, im.
void write_symbol_csv(const std::string& path, const Symbol& a);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace beals
