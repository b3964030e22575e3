// Micro-benchmark for the three GEMM variants at training shapes.
#include <chrono>
#include <cstdio>

#include <Eigen/Core>

#include "gansemble/rng.hpp"
#include "gansemble/tensor.hpp"

using namespace gansemble;
using Clock = std::chrono::steady_clock;

static double secs(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

int main() {
  Rng rng(1);
  const std::size_t B = 100, I = 400, O = 400;
  Tensor x({B, I}), w({I, O}), y, dw({I, O}), dx;
  for (auto& v : x.data) v = rng.normal();
  for (auto& v : w.data) v = rng.normal();

  const int reps = 400;
  double flops = 2.0 * B * I * O * reps;

  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) matmul(x, w, y);
  auto t1 = Clock::now();
  std::printf("hand matmul      : %6.2f GFLOP/s\n", flops / secs(t0, t1) / 1e9);

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) matmul_at_b_acc(x, y, dw);
  t1 = Clock::now();
  std::printf("hand at_b_acc    : %6.2f GFLOP/s\n", flops / secs(t0, t1) / 1e9);

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) matmul_a_bt(y, w, dx);
  t1 = Clock::now();
  std::printf("hand a_bt        : %6.2f GFLOP/s\n", flops / secs(t0, t1) / 1e9);

  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<Mat> mx(x.ptr(), B, I), mw(w.ptr(), I, O), my(y.ptr(), B, O),
      mdw(dw.ptr(), I, O), mdx(dx.ptr(), B, I);

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) my.noalias() = mx * mw;
  t1 = Clock::now();
  std::printf("eigen matmul     : %6.2f GFLOP/s\n", flops / secs(t0, t1) / 1e9);

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) mdw.noalias() += mx.transpose() * my;
  t1 = Clock::now();
  std::printf("eigen at_b_acc   : %6.2f GFLOP/s\n", flops / secs(t0, t1) / 1e9);

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) mdx.noalias() = my * mw.transpose();
  t1 = Clock::now();
  std::printf("eigen a_bt       : %6.2f GFLOP/s\n", flops / secs(t0, t1) / 1e9);

  std::printf("checksum %g\n", dx.data[0] + dw.data[0] + y.data[0]);
  return 0;
}
