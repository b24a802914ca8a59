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

#ifndef MEMEX_KERNELS_H_
#define MEMEX_KERNELS_H_

#include "memex/matrix.h"

// Dense numeric kernels used by the autodiff ops. Each kernel exists twice:
// a plain serial reference in `serial` and an OpenMP version in `parallel`.
// The parallel versions split work over output rows only, so every output
// element is accumulated in the same order as the reference and the two
// agree bitwise.
namespace memex::kernels {

enum class Backend { kSerial, kParallel };

// Process-wide backend used by the dispatching functions below.
void SetBackend(Backend backend);
Backend GetBackend();

// Minimum multiply-add count before the parallel kernels fork threads.
inline constexpr long kParallelThreshold = 1L << 15;

namespace serial {
Matrix MatMul(const Matrix &a, const Matrix &b);    // a·b
Matrix MatMulNT(const Matrix &a, const Matrix &b);  // a·bᵀ
Matrix MatMulTN(const Matrix &a, const Matrix &b);  // aᵀ·b
// Row-wise softmax of (x + mask); mask may be empty.
Matrix SoftmaxRows(const Matrix &x, const Matrix &mask);
// Row-wise standardization; fills inv_std (rows×1).
Matrix NormalizeRows(const Matrix &x, double eps, Matrix &inv_std);
}  // namespace serial

namespace parallel {
Matrix MatMul(const Matrix &a, const Matrix &b);
Matrix MatMulNT(const Matrix &a, const Matrix &b);
Matrix MatMulTN(const Matrix &a, const Matrix &b);
Matrix SoftmaxRows(const Matrix &x, const Matrix &mask);
Matrix NormalizeRows(const Matrix &x, double eps, Matrix &inv_std);
}  // namespace parallel

Matrix MatMul(const Matrix &a, const Matrix &b);
Matrix MatMulNT(const Matrix &a, const Matrix &b);
Matrix MatMulTN(const Matrix &a, const Matrix &b);
Matrix SoftmaxRows(const Matrix &x, const Matrix &mask = {});
Matrix NormalizeRows(const Matrix &x, double eps, Matrix &inv_std);

}  // namespace memex::kernels

#endif  // MEMEX_KERNELS_H_
