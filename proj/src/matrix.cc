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

#include "memex/matrix.h"

#include <algorithm>
#include <cmath>

#include "memex/errors.h"

namespace memex {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0 || data_.size() != std::size_t(rows) * cols) {
    throw ShapeError("matrix data size does not match shape");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = int(rows.size());
  cols_ = rows_ == 0 ? 0 : int(rows.begin()->size());
  data_.reserve(std::size_t(rows_) * cols_);
  for (const auto &r : rows) {
    if (int(r.size()) != cols_) throw ShapeError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::RowVector(std::span<const double> values) {
  return Matrix(1, int(values.size()), std::vector<double>(values.begin(), values.end()));
}

void Matrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::MaxAbs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::Sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double MaxAbsDiff(const Matrix &a, const Matrix &b) {
  if (!a.SameShape(b)) throw ShapeError("MaxAbsDiff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace memex
