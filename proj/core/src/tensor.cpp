#include "jigsaw3d/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace kernels {

void gemm(std::size_t n, std::size_t kdim, std::size_t m, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, const double* bias) {
  for (std::size_t i = 0; i < n; ++i) {
    double* __restrict crow = c + i * ldc;
    if (bias != nullptr) {
      std::copy(bias, bias + m, crow);
    } else {
      std::fill(crow, crow + m, 0.0);
    }
    const double* arow = a + i * lda;
    for (std::size_t k = 0; k < kdim; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* __restrict brow = b + k * ldb;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
}

void gemm_at_b_add(std::size_t n, std::size_t kdim, std::size_t m, const double* a,
                   std::size_t lda, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * lda;
    const double* __restrict brow = b + i * ldb;
    for (std::size_t k = 0; k < kdim; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      double* __restrict crow = c + k * ldc;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
}

}  // namespace kernels

void Tensor2::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor2::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor2 Tensor2::transposed() const {
  Tensor2 t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out, const Tensor2* bias) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  require(bias == nullptr || (bias->rows() == 1 && bias->cols() == b.cols()),
          "matmul: bias must be 1 x cols(b)");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Tensor2(a.rows(), b.cols());
  kernels::gemm(a.rows(), a.cols(), b.cols(), a.data().data(), a.cols(), b.data().data(),
                b.cols(), out.data().data(), out.cols(),
                bias != nullptr ? bias->data().data() : nullptr);
}

void matmul_at_b_add(const Tensor2& a, const Tensor2& b, Tensor2& out) {
  require(a.rows() == b.rows(), "matmul_at_b_add: row counts differ");
  require(out.rows() == a.cols() && out.cols() == b.cols(), "matmul_at_b_add: bad output shape");
  kernels::gemm_at_b_add(a.rows(), a.cols(), b.cols(), a.data().data(), a.cols(),
                         b.data().data(), b.cols(), out.data().data(), out.cols());
}

}  // namespace jigsaw3d
