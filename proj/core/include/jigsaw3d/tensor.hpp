#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace jigsaw3d {

// Dense row-major matrix of doubles.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void fill(double value);
  bool all_finite() const;
  Tensor2 transposed() const;

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace kernels {

// C[i][j] = bias[j] + sum_k A[i][k] * B[k][j] for an n x kdim by kdim x m
// product with leading dimensions lda/ldb/ldc. bias may be null (zero).
void gemm(std::size_t n, std::size_t kdim, std::size_t m, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, const double* bias);

// C[k][j] += sum_i A[i][k] * B[i][j].
void gemm_at_b_add(std::size_t n, std::size_t kdim, std::size_t m, const double* a,
                   std::size_t lda, const double* b, std::size_t ldb, double* c, std::size_t ldc);

}  // namespace kernels

// out = a * b (+ bias row broadcast when bias is non-null). Every output
// element is accumulated in the same order regardless of its row, so a
// row permutation of `a` permutes the output rows bit for bit.
void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out, const Tensor2* bias = nullptr);

// out += a^T * b.
void matmul_at_b_add(const Tensor2& a, const Tensor2& b, Tensor2& out);

}  // namespace jigsaw3d
