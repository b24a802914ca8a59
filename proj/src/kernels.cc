// Copyright 2026 The Memex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "memex/kernels.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "memex/errors.h"

namespace memex::kernels {
namespace {

std::atomic<Backend> g_backend{Backend::kParallel};

void CheckInner(int a, int b, const char *what) {
  if (a != b) throw ShapeError(std::string(what) + ": inner dimension mismatch");
}

void CheckMask(const Matrix &x, const Matrix &mask) {
  if (!mask.empty() && !mask.SameShape(x)) throw ShapeError("softmax mask shape mismatch");
}

// Row kernels shared by both backends; the backends differ only in how rows
// are distributed.
inline void MatMulRow(const Matrix &a, const Matrix &b, Matrix &c, int i) {
  const int inner = a.cols(), n = b.cols();
  double *out = c.data() + std::size_t(i) * n;
  for (int k = 0; k < inner; ++k) {
    const double aik = a(i, k);
    const double *brow = b.data() + std::size_t(k) * n;
    for (int j = 0; j < n; ++j) out[j] += aik * brow[j];
  }
}

inline void MatMulNTRow(const Matrix &a, const Matrix &b, Matrix &c, int i) {
  const int inner = a.cols();
  const double *arow = a.data() + std::size_t(i) * inner;
  for (int j = 0; j < b.rows(); ++j) {
    const double *brow = b.data() + std::size_t(j) * inner;
    double s = 0.0;
    for (int k = 0; k < inner; ++k) s += arow[k] * brow[k];
    c(i, j) = s;
  }
}

// Row i of aᵀ·b, i indexes columns of a.
inline void MatMulTNRow(const Matrix &a, const Matrix &b, Matrix &c, int i) {
  const int n = b.cols();
  double *out = c.data() + std::size_t(i) * n;
  for (int k = 0; k < a.rows(); ++k) {
    const double aki = a(k, i);
    const double *brow = b.data() + std::size_t(k) * n;
    for (int j = 0; j < n; ++j) out[j] += aki * brow[j];
  }
}

inline void SoftmaxRow(const Matrix &x, const Matrix &mask, Matrix &y, int i) {
  const int n = x.cols();
  double mx = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double v = x(i, j) + (mask.empty() ? 0.0 : mask(i, j));
    y(i, j) = v;
    mx = std::max(mx, v);
  }
  double z = 0.0;
  for (int j = 0; j < n; ++j) {
    double e = std::isinf(y(i, j)) && y(i, j) < 0 ? 0.0 : std::exp(y(i, j) - mx);
    y(i, j) = e;
    z += e;
  }
  for (int j = 0; j < n; ++j) y(i, j) /= z;
}

inline void NormalizeRow(const Matrix &x, double eps, Matrix &y, Matrix &inv_std, int i) {
  const int n = x.cols();
  double mean = 0.0;
  for (int j = 0; j < n; ++j) mean += x(i, j);
  mean /= n;
  double var = 0.0;
  for (int j = 0; j < n; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
  var /= n;
  const double is = 1.0 / std::sqrt(var + eps);
  inv_std(i, 0) = is;
  for (int j = 0; j < n; ++j) y(i, j) = (x(i, j) - mean) * is;
}

long Work(long a, long b, long c) { return a * b * c; }

}  // namespace

void SetBackend(Backend backend) { g_backend.store(backend); }
Backend GetBackend() { return g_backend.load(); }

namespace serial {

Matrix MatMul(const Matrix &a, const Matrix &b) {
  CheckInner(a.cols(), b.rows(), "MatMul");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) MatMulRow(a, b, c, i);
  return c;
}

Matrix MatMulNT(const Matrix &a, const Matrix &b) {
  CheckInner(a.cols(), b.cols(), "MatMulNT");
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) MatMulNTRow(a, b, c, i);
  return c;
}

Matrix MatMulTN(const Matrix &a, const Matrix &b) {
  CheckInner(a.rows(), b.rows(), "MatMulTN");
  Matrix c(a.cols(), b.cols());
  for (int i = 0; i < a.cols(); ++i) MatMulTNRow(a, b, c, i);
  return c;
}

Matrix SoftmaxRows(const Matrix &x, const Matrix &mask) {
  CheckMask(x, mask);
  Matrix y(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) SoftmaxRow(x, mask, y, i);
  return y;
}

Matrix NormalizeRows(const Matrix &x, double eps, Matrix &inv_std) {
  Matrix y(x.rows(), x.cols());
  inv_std = Matrix(x.rows(), 1);
  for (int i = 0; i < x.rows(); ++i) NormalizeRow(x, eps, y, inv_std, i);
  return y;
}

}  // namespace serial

namespace parallel {

Matrix MatMul(const Matrix &a, const Matrix &b) {
  CheckInner(a.cols(), b.rows(), "MatMul");
  Matrix c(a.rows(), b.cols());
  const int rows = a.rows();
#pragma omp parallel for schedule(static) if (Work(rows, a.cols(), b.cols()) > kParallelThreshold)
  for (int i = 0; i < rows; ++i) MatMulRow(a, b, c, i);
  return c;
}

Matrix MatMulNT(const Matrix &a, const Matrix &b) {
  CheckInner(a.cols(), b.cols(), "MatMulNT");
  Matrix c(a.rows(), b.rows());
  const int rows = a.rows();
#pragma omp parallel for schedule(static) if (Work(rows, a.cols(), b.rows()) > kParallelThreshold)
  for (int i = 0; i < rows; ++i) MatMulNTRow(a, b, c, i);
  return c;
}

Matrix MatMulTN(const Matrix &a, const Matrix &b) {
  CheckInner(a.rows(), b.rows(), "MatMulTN");
  Matrix c(a.cols(), b.cols());
  const int rows = a.cols();
#pragma omp parallel for schedule(static) if (Work(rows, a.rows(), b.cols()) > kParallelThreshold)
  for (int i = 0; i < rows; ++i) MatMulTNRow(a, b, c, i);
  return c;
}

Matrix SoftmaxRows(const Matrix &x, const Matrix &mask) {
  CheckMask(x, mask);
  Matrix y(x.rows(), x.cols());
  const int rows = x.rows();
#pragma omp parallel for schedule(static) if (Work(rows, x.cols(), 16) > kParallelThreshold)
  for (int i = 0; i < rows; ++i) SoftmaxRow(x, mask, y, i);
  return y;
}

Matrix NormalizeRows(const Matrix &x, double eps, Matrix &inv_std) {
  Matrix y(x.rows(), x.cols());
  inv_std = Matrix(x.rows(), 1);
  const int rows = x.rows();
#pragma omp parallel for schedule(static) if (Work(rows, x.cols(), 8) > kParallelThreshold)
  for (int i = 0; i < rows; ++i) NormalizeRow(x, eps, y, inv_std, i);
  return y;
}

}  // namespace parallel

Matrix MatMul(const Matrix &a, const Matrix &b) {
  return GetBackend() == Backend::kParallel ? parallel::MatMul(a, b) : serial::MatMul(a, b);
}
Matrix MatMulNT(const Matrix &a, const Matrix &b) {
  return GetBackend() == Backend::kParallel ? parallel::MatMulNT(a, b) : serial::MatMulNT(a, b);
}
Matrix MatMulTN(const Matrix &a, const Matrix &b) {
  return GetBackend() == Backend::kParallel ? parallel::MatMulTN(a, b) : serial::MatMulTN(a, b);
}
Matrix SoftmaxRows(const Matrix &x, const Matrix &mask) {
  return GetBackend() == Backend::kParallel ? parallel::SoftmaxRows(x, mask)
                                            : serial::SoftmaxRows(x, mask);
}
Matrix NormalizeRows(const Matrix &x, double eps, Matrix &inv_std) {
  return GetBackend() == Backend::kParallel ? parallel::NormalizeRows(x, eps, inv_std)
                                            : serial::NormalizeRows(x, eps, inv_std);
}

}  // namespace memex::kernels
