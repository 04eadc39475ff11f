#include "lateralbench/mcq/kernels.hpp"

#include <cmath>

namespace lateral::mcq::kernels {

// Per-element / per-row bodies shared by both variants. The OpenMP entry
// points only change which thread owns an output row; the arithmetic for
// each element stays a single serial reduction, so serial and parallel
// results are bitwise identical.
namespace {

inline void matmul_row(int r, int k, int n, const double* A, const double* B,
                       double* C) {
  const double* a = A + static_cast<size_t>(r) * k;
  double* c = C + static_cast<size_t>(r) * n;
  for (int j = 0; j < n; ++j) c[j] = 0.0;
  for (int p = 0; p < k; ++p) {
    const double av = a[p];
    const double* b = B + static_cast<size_t>(p) * n;
    for (int j = 0; j < n; ++j) c[j] += av * b[j];
  }
}

inline void matmul_nt_row(int r, int k, int n, const double* A, const double* B,
                          double* C) {
  const double* a = A + static_cast<size_t>(r) * k;
  double* c = C + static_cast<size_t>(r) * n;
  for (int j = 0; j < n; ++j) {
    const double* b = B + static_cast<size_t>(j) * k;
    double acc = 0.0;
    for (int p = 0; p < k; ++p) acc += a[p] * b[p];
    c[j] = acc;
  }
}

inline void matmul_tn_row(int r, int m, int k, int n, const double* A,
                          const double* B, double* C) {
  // Row r of C = column r of A (length m) times B.
  double* c = C + static_cast<size_t>(r) * n;
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int p = 0; p < m; ++p) {
      acc += A[static_cast<size_t>(p) * k + r] * B[static_cast<size_t>(p) * n + j];
    }
    c[j] = acc;
  }
}

inline void layer_norm_row(int r, int n, const double* X, const double* gamma,
                           const double* beta, double eps, double* Y,
                           double* mean_out, double* rstd_out) {
  const double* x = X + static_cast<size_t>(r) * n;
  double* y = Y + static_cast<size_t>(r) * n;
  double mean = 0.0;
  for (int j = 0; j < n; ++j) mean += x[j];
  mean /= n;
  double var = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = x[j] - mean;
    var += d * d;
  }
  var /= n;
  const double rstd = 1.0 / std::sqrt(var + eps);
  for (int j = 0; j < n; ++j) {
    y[j] = (x[j] - mean) * rstd * gamma[j] + beta[j];
  }
  if (mean_out) mean_out[r] = mean;
  if (rstd_out) rstd_out[r] = rstd;
}

inline void masked_softmax_row(int r, int cols, int valid, const double* S,
                               double* P) {
  const double* s = S + static_cast<size_t>(r) * cols;
  double* p = P + static_cast<size_t>(r) * cols;
  double max_v = s[0];
  for (int j = 1; j < valid; ++j) max_v = std::max(max_v, s[j]);
  double denom = 0.0;
  for (int j = 0; j < valid; ++j) {
    p[j] = std::exp(s[j] - max_v);
    denom += p[j];
  }
  for (int j = 0; j < valid; ++j) p[j] /= denom;
  for (int j = valid; j < cols; ++j) p[j] = 0.0;
}

inline void softmax_backward_row(int r, int cols, const double* P,
                                 const double* dP, double* dS) {
  const double* p = P + static_cast<size_t>(r) * cols;
  const double* dp = dP + static_cast<size_t>(r) * cols;
  double* ds = dS + static_cast<size_t>(r) * cols;
  double dot = 0.0;
  for (int j = 0; j < cols; ++j) dot += dp[j] * p[j];
  for (int j = 0; j < cols; ++j) ds[j] = p[j] * (dp[j] - dot);
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

inline double gelu_one(double x) {
  return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
}

inline double gelu_grad_one(double x) {
  // d/dx [x * Phi(x)] = Phi(x) + x * phi(x)
  const double phi = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * phi;
}

}  // namespace

namespace serial {

void matmul(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int r = 0; r < m; ++r) matmul_row(r, k, n, A, B, C);
}

void matmul_nt(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int r = 0; r < m; ++r) matmul_nt_row(r, k, n, A, B, C);
}

void matmul_tn(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int r = 0; r < k; ++r) matmul_tn_row(r, m, k, n, A, B, C);
}

void add_bias_rows(int rows, int n, double* X, const double* bias) {
  for (int r = 0; r < rows; ++r) {
    double* x = X + static_cast<size_t>(r) * n;
    for (int j = 0; j < n; ++j) x[j] += bias[j];
  }
}

void layer_norm_rows(int rows, int n, const double* X, const double* gamma,
                     const double* beta, double eps, double* Y,
                     double* mean_out, double* rstd_out) {
  for (int r = 0; r < rows; ++r) {
    layer_norm_row(r, n, X, gamma, beta, eps, Y, mean_out, rstd_out);
  }
}

void masked_softmax_rows(int rows, int cols, int valid, const double* S,
                         double* P) {
  for (int r = 0; r < rows; ++r) masked_softmax_row(r, cols, valid, S, P);
}

void softmax_backward_rows(int rows, int cols, const double* P, const double* dP,
                           double* dS) {
  for (int r = 0; r < rows; ++r) softmax_backward_row(r, cols, P, dP, dS);
}

void gelu(int64_t n, const double* X, double* Y) {
  for (int64_t i = 0; i < n; ++i) Y[i] = gelu_one(X[i]);
}

void gelu_backward(int64_t n, const double* X, const double* dY, double* dX) {
  for (int64_t i = 0; i < n; ++i) dX[i] = gelu_grad_one(X[i]) * dY[i];
}

}  // namespace serial

void matmul(int m, int k, int n, const double* A, const double* B, double* C) {
#pragma omp parallel for schedule(static) if (m > 1)
  for (int r = 0; r < m; ++r) matmul_row(r, k, n, A, B, C);
}

void matmul_nt(int m, int k, int n, const double* A, const double* B, double* C) {
#pragma omp parallel for schedule(static) if (m > 1)
  for (int r = 0; r < m; ++r) matmul_nt_row(r, k, n, A, B, C);
}

void matmul_tn(int m, int k, int n, const double* A, const double* B, double* C) {
#pragma omp parallel for schedule(static) if (k > 1)
  for (int r = 0; r < k; ++r) matmul_tn_row(r, m, k, n, A, B, C);
}

void add_bias_rows(int rows, int n, double* X, const double* bias) {
#pragma omp parallel for schedule(static) if (rows > 1)
  for (int r = 0; r < rows; ++r) {
    double* x = X + static_cast<size_t>(r) * n;
    for (int j = 0; j < n; ++j) x[j] += bias[j];
  }
}

void layer_norm_rows(int rows, int n, const double* X, const double* gamma,
                     const double* beta, double eps, double* Y,
                     double* mean_out, double* rstd_out) {
#pragma omp parallel for schedule(static) if (rows > 1)
  for (int r = 0; r < rows; ++r) {
    layer_norm_row(r, n, X, gamma, beta, eps, Y, mean_out, rstd_out);
  }
}

void masked_softmax_rows(int rows, int cols, int valid, const double* S,
                         double* P) {
#pragma omp parallel for schedule(static) if (rows > 1)
  for (int r = 0; r < rows; ++r) masked_softmax_row(r, cols, valid, S, P);
}

void softmax_backward_rows(int rows, int cols, const double* P, const double* dP,
                           double* dS) {
#pragma omp parallel for schedule(static) if (rows > 1)
  for (int r = 0; r < rows; ++r) softmax_backward_row(r, cols, P, dP, dS);
}

void gelu(int64_t n, const double* X, double* Y) {
#pragma omp parallel for schedule(static) if (n > 64)
  for (int64_t i = 0; i < n; ++i) Y[i] = gelu_one(X[i]);
}

void gelu_backward(int64_t n, const double* X, const double* dY, double* dX) {
#pragma omp parallel for schedule(static) if (n > 64)
  for (int64_t i = 0; i < n; ++i) dX[i] = gelu_grad_one(X[i]) * dY[i];
}

void matmul(const Mat& A, const Mat& B, Mat& C) {
  C = Mat(A.rows, B.cols);
  matmul(A.rows, A.cols, B.cols, A.a.data(), B.a.data(), C.a.data());
}

void matmul_nt(const Mat& A, const Mat& B, Mat& C) {
  C = Mat(A.rows, B.rows);
  matmul_nt(A.rows, A.cols, B.rows, A.a.data(), B.a.data(), C.a.data());
}

void matmul_tn(const Mat& A, const Mat& B, Mat& C) {
  C = Mat(A.cols, B.cols);
  matmul_tn(A.rows, A.cols, B.cols, A.a.data(), B.a.data(), C.a.data());
}

}  // namespace lateral::mcq::kernels
