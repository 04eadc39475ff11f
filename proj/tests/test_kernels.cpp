#include <doctest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include <omp.h>

#include "lateralbench/mcq/kernels.hpp"
#include "lateralbench/rng.hpp"

using namespace lateral;
using namespace lateral::mcq;

namespace {

std::vector<double> random_vec(size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("matmul agrees with an explicit triple loop") {
  Rng rng(1);
  const std::tuple<int, int, int> shapes[] = {
      {1, 1, 1}, {3, 5, 2}, {7, 4, 9}, {16, 16, 16}};
  for (auto [m, k, n] : shapes) {
    const auto A = random_vec(static_cast<size_t>(m) * k, rng);
    const auto B = random_vec(static_cast<size_t>(k) * n, rng);
    std::vector<double> C(static_cast<size_t>(m) * n);
    kernels::matmul(m, k, n, A.data(), B.data(), C.data());

    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        double want = 0.0;
        for (int p = 0; p < k; ++p) want += A[i * k + p] * B[p * n + j];
        CHECK(C[i * n + j] == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("transposed matmuls match plain matmul on materialized transposes") {
  Rng rng(2);
  const int m = 6, k = 5, n = 4;
  const auto A = random_vec(m * k, rng);
  const auto B = random_vec(n * k, rng);  // for A * B^T
  std::vector<double> BT(k * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) BT[j * n + i] = B[i * k + j];
  }
  std::vector<double> C1(m * n), C2(m * n);
  kernels::matmul_nt(m, k, n, A.data(), B.data(), C1.data());
  kernels::matmul(m, k, n, A.data(), BT.data(), C2.data());
  CHECK(C1 == C2);  // identical reduction order -> bitwise

  const auto D = random_vec(m * n, rng);  // for A^T * D
  std::vector<double> AT(k * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) AT[j * m + i] = A[i * k + j];
  }
  std::vector<double> E1(k * n), E2(k * n);
  kernels::matmul_tn(m, k, n, A.data(), D.data(), E1.data());
  kernels::matmul(k, m, n, AT.data(), D.data(), E2.data());
  for (size_t i = 0; i < E1.size(); ++i) {
    CHECK(E1[i] == doctest::Approx(E2[i]).epsilon(1e-12));
  }
}

TEST_CASE("OpenMP kernels are bitwise equal to the serial reference") {
  Rng rng(3);
  const int rows = 33, dim = 17;
  const auto X = random_vec(static_cast<size_t>(rows) * dim, rng);
  const auto Y = random_vec(static_cast<size_t>(dim) * rows, rng);
  const auto gamma = random_vec(dim, rng);
  const auto beta = random_vec(dim, rng);

  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);

    std::vector<double> a(static_cast<size_t>(rows) * rows);
    std::vector<double> b(a.size());
    kernels::serial::matmul(rows, dim, rows, X.data(), Y.data(), a.data());
    kernels::matmul(rows, dim, rows, X.data(), Y.data(), b.data());
    CHECK(a == b);

    std::vector<double> ln_a(X.size()), ln_b(X.size());
    std::vector<double> mean_a(rows), rstd_a(rows), mean_b(rows), rstd_b(rows);
    kernels::serial::layer_norm_rows(rows, dim, X.data(), gamma.data(),
                                     beta.data(), 1e-5, ln_a.data(),
                                     mean_a.data(), rstd_a.data());
    kernels::layer_norm_rows(rows, dim, X.data(), gamma.data(), beta.data(),
                             1e-5, ln_b.data(), mean_b.data(), rstd_b.data());
    CHECK(ln_a == ln_b);
    CHECK(mean_a == mean_b);
    CHECK(rstd_a == rstd_b);

    std::vector<double> sm_a(X.size()), sm_b(X.size());
    kernels::serial::masked_softmax_rows(rows, dim, dim - 3, X.data(),
                                         sm_a.data());
    kernels::masked_softmax_rows(rows, dim, dim - 3, X.data(), sm_b.data());
    CHECK(sm_a == sm_b);

    std::vector<double> g_a(X.size()), g_b(X.size());
    kernels::serial::gelu(static_cast<int64_t>(X.size()), X.data(), g_a.data());
    kernels::gelu(static_cast<int64_t>(X.size()), X.data(), g_b.data());
    CHECK(g_a == g_b);
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("masked softmax: valid prefix normalized, suffix zero") {
  Rng rng(4);
  const int rows = 5, cols = 9, valid = 6;
  const auto S = random_vec(static_cast<size_t>(rows) * cols, rng);
  std::vector<double> P(S.size());
  kernels::masked_softmax_rows(rows, cols, valid, S.data(), P.data());

  for (int r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int j = 0; j < valid; ++j) {
      CHECK(P[r * cols + j] >= 0.0);
      sum += P[r * cols + j];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = valid; j < cols; ++j) CHECK(P[r * cols + j] == 0.0);
  }

  // Equivalent to additive -inf masking of the suffix before a full softmax.
  for (int r = 0; r < rows; ++r) {
    long double max_v = -1e30L;
    for (int j = 0; j < valid; ++j) {
      max_v = std::max<long double>(max_v, S[r * cols + j]);
    }
    long double denom = 0.0L;
    for (int j = 0; j < valid; ++j) {
      denom += expl(static_cast<long double>(S[r * cols + j]) - max_v);
    }
    for (int j = 0; j < valid; ++j) {
      const long double want =
          expl(static_cast<long double>(S[r * cols + j]) - max_v) / denom;
      CHECK(P[r * cols + j] ==
            doctest::Approx(static_cast<double>(want)).epsilon(1e-12));
    }
  }
}

TEST_CASE("layer norm rows come out standardized") {
  Rng rng(5);
  const int rows = 8, dim = 32;
  const auto X = random_vec(static_cast<size_t>(rows) * dim, rng);
  std::vector<double> gamma(dim, 1.0), beta(dim, 0.0), Y(X.size());
  kernels::layer_norm_rows(rows, dim, X.data(), gamma.data(), beta.data(),
                           1e-12, Y.data(), nullptr, nullptr);
  for (int r = 0; r < rows; ++r) {
    double mean = 0.0, var = 0.0;
    for (int j = 0; j < dim; ++j) mean += Y[r * dim + j];
    mean /= dim;
    for (int j = 0; j < dim; ++j) {
      var += (Y[r * dim + j] - mean) * (Y[r * dim + j] - mean);
    }
    var /= dim;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("softmax backward matches finite differences") {
  Rng rng(6);
  const int cols = 7;
  auto S = random_vec(cols, rng);
  const auto dP = random_vec(cols, rng);

  std::vector<double> P(cols);
  kernels::masked_softmax_rows(1, cols, cols, S.data(), P.data());
  std::vector<double> dS(cols);
  kernels::softmax_backward_rows(1, cols, P.data(), dP.data(), dS.data());

  const double h = 1e-6;
  for (int j = 0; j < cols; ++j) {
    auto S_hi = S, S_lo = S;
    S_hi[j] += h;
    S_lo[j] -= h;
    std::vector<double> P_hi(cols), P_lo(cols);
    kernels::masked_softmax_rows(1, cols, cols, S_hi.data(), P_hi.data());
    kernels::masked_softmax_rows(1, cols, cols, S_lo.data(), P_lo.data());
    double fd = 0.0;
    for (int i = 0; i < cols; ++i) {
      fd += dP[i] * (P_hi[i] - P_lo[i]) / (2 * h);
    }
    CHECK(dS[j] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("gelu values and derivative") {
  const std::vector<double> xs = {-3.0, -1.0, -0.1, 0.0, 0.1, 1.0, 3.0};
  std::vector<double> ys(xs.size());
  kernels::gelu(static_cast<int64_t>(xs.size()), xs.data(), ys.data());
  for (size_t i = 0; i < xs.size(); ++i) {
    const double want = 0.5 * xs[i] * (1.0 + std::erf(xs[i] / std::sqrt(2.0)));
    CHECK(ys[i] == doctest::Approx(want).epsilon(1e-15));
  }

  std::vector<double> ones(xs.size(), 1.0), dx(xs.size());
  kernels::gelu_backward(static_cast<int64_t>(xs.size()), xs.data(),
                         ones.data(), dx.data());
  const double h = 1e-6;
  for (size_t i = 0; i < xs.size(); ++i) {
    double lo, hi;
    const double a = xs[i] - h, b = xs[i] + h;
    kernels::gelu(1, &a, &lo);
    kernels::gelu(1, &b, &hi);
    CHECK(dx[i] == doctest::Approx((hi - lo) / (2 * h)).epsilon(1e-7));
  }
}
