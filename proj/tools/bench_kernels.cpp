// Times the serial reference kernels against their OpenMP counterparts and
// checks that both produce bitwise-identical output.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "lateralbench/mcq/kernels.hpp"
#include "lateralbench/rng.hpp"

using lateral::Rng;
namespace kernels = lateral::mcq::kernels;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int iters) {
  fn();  // warm up
  const auto start = Clock::now();
  for (int i = 0; i < iters; ++i) fn();
  const auto elapsed = Clock::now() - start;
  return std::chrono::duration<double, std::milli>(elapsed).count() / iters;
}

std::vector<double> random_vec(size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a == b;
}

void bench_matmul(int n, int iters, Rng& rng) {
  const auto A = random_vec(static_cast<size_t>(n) * n, rng);
  const auto B = random_vec(static_cast<size_t>(n) * n, rng);
  std::vector<double> C_serial(static_cast<size_t>(n) * n);
  std::vector<double> C_omp(static_cast<size_t>(n) * n);

  const double t_serial = time_ms(
      [&] { kernels::serial::matmul(n, n, n, A.data(), B.data(), C_serial.data()); },
      iters);
  const double t_omp = time_ms(
      [&] { kernels::matmul(n, n, n, A.data(), B.data(), C_omp.data()); }, iters);

  std::printf("matmul %4dx%-4d  serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %s\n",
              n, n, t_serial, t_omp, t_serial / t_omp,
              bitwise_equal(C_serial, C_omp) ? "bitwise-equal" : "MISMATCH");
}

void bench_layer_norm(int rows, int dim, int iters, Rng& rng) {
  const auto X = random_vec(static_cast<size_t>(rows) * dim, rng);
  const auto gamma = random_vec(static_cast<size_t>(dim), rng);
  const auto beta = random_vec(static_cast<size_t>(dim), rng);
  std::vector<double> Y_serial(X.size()), Y_omp(X.size());

  const double t_serial = time_ms(
      [&] {
        kernels::serial::layer_norm_rows(rows, dim, X.data(), gamma.data(),
                                         beta.data(), 1e-5, Y_serial.data(),
                                         nullptr, nullptr);
      },
      iters);
  const double t_omp = time_ms(
      [&] {
        kernels::layer_norm_rows(rows, dim, X.data(), gamma.data(), beta.data(),
                                 1e-5, Y_omp.data(), nullptr, nullptr);
      },
      iters);

  std::printf("layer_norm %4dx%-4d  serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %s\n",
              rows, dim, t_serial, t_omp, t_serial / t_omp,
              bitwise_equal(Y_serial, Y_omp) ? "bitwise-equal" : "MISMATCH");
}

void bench_softmax(int rows, int cols, int iters, Rng& rng) {
  const auto S = random_vec(static_cast<size_t>(rows) * cols, rng);
  std::vector<double> P_serial(S.size()), P_omp(S.size());

  const double t_serial = time_ms(
      [&] {
        kernels::serial::masked_softmax_rows(rows, cols, cols, S.data(),
                                             P_serial.data());
      },
      iters);
  const double t_omp = time_ms(
      [&] {
        kernels::masked_softmax_rows(rows, cols, cols, S.data(), P_omp.data());
      },
      iters);

  std::printf("softmax %5dx%-4d  serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %s\n",
              rows, cols, t_serial, t_omp, t_serial / t_omp,
              bitwise_equal(P_serial, P_omp) ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n\n", omp_get_max_threads());
  Rng rng(42);

  for (int n : {64, 128, 256, 512}) {
    bench_matmul(n, n <= 128 ? 50 : 10, rng);
  }
  std::printf("\n");
  for (int rows : {256, 4096}) {
    bench_layer_norm(rows, 256, 50, rng);
  }
  std::printf("\n");
  for (int rows : {256, 4096}) {
    bench_softmax(rows, 256, 50, rng);
  }
  return 0;
}
