#pragma once

#include <cstdint>
#include <vector>

namespace lateral::mcq {

// Dense row-major matrix of doubles. All model math is 64-bit.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return a.size(); }
  void zero() { a.assign(a.size(), 0.0); }

  bool operator==(const Mat&) const = default;
};

// Data-parallel primitives. The default entry points split their outer loop
// across OpenMP threads; kernels::serial holds the plain-loop reference
// implementations. Both compute every output element with identical
// serialized arithmetic, so results are bitwise equal for any thread count
// (each element is one serial dot product / row reduction owned by exactly
// one thread). tools/bench_kernels compares the two.
namespace kernels {

namespace serial {
// C[m x n] = A[m x k] * B[k x n]
void matmul(int m, int k, int n, const double* A, const double* B, double* C);
// C[m x n] = A[m x k] * B^T where B is [n x k]
void matmul_nt(int m, int k, int n, const double* A, const double* B, double* C);
// C[k x n] = A^T * B where A is [m x k], B is [m x n]
void matmul_tn(int m, int k, int n, const double* A, const double* B, double* C);
// X[r x n] += bias[n] per row
void add_bias_rows(int rows, int n, double* X, const double* bias);
// Per-row layer norm: Y = (x - mean) / sqrt(var + eps) * gamma + beta.
// mean_out/rstd_out (length rows) capture the saved statistics for backprop;
// either may be null.
void layer_norm_rows(int rows, int n, const double* X, const double* gamma,
                     const double* beta, double eps, double* Y,
                     double* mean_out, double* rstd_out);
// Row-wise stable softmax over the first `valid` columns; columns >= valid
// get probability 0 (additive -inf masking of padded keys).
void masked_softmax_rows(int rows, int cols, int valid, const double* S,
                         double* P);
// dS = P .* (dP - rowdot(dP, P)), the softmax Jacobian applied per row.
void softmax_backward_rows(int rows, int cols, const double* P,
                           const double* dP, double* dS);
// Exact GELU: 0.5 * x * (1 + erf(x / sqrt(2))), applied elementwise.
void gelu(int64_t n, const double* X, double* Y);
// dX = gelu'(X) .* dY
void gelu_backward(int64_t n, const double* X, const double* dY, double* dX);
}  // namespace serial

void matmul(int m, int k, int n, const double* A, const double* B, double* C);
void matmul_nt(int m, int k, int n, const double* A, const double* B, double* C);
void matmul_tn(int m, int k, int n, const double* A, const double* B, double* C);
void add_bias_rows(int rows, int n, double* X, const double* bias);
void layer_norm_rows(int rows, int n, const double* X, const double* gamma,
                     const double* beta, double eps, double* Y,
                     double* mean_out, double* rstd_out);
void masked_softmax_rows(int rows, int cols, int valid, const double* S,
                         double* P);
void softmax_backward_rows(int rows, int cols, const double* P,
                           const double* dP, double* dS);
void gelu(int64_t n, const double* X, double* Y);
void gelu_backward(int64_t n, const double* X, const double* dY, double* dX);

// Mat convenience wrappers over the OpenMP kernels.
void matmul(const Mat& A, const Mat& B, Mat& C);
void matmul_nt(const Mat& A, const Mat& B, Mat& C);
void matmul_tn(const Mat& A, const Mat& B, Mat& C);

}  // namespace kernels

}  // namespace lateral::mcq
