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

#ifndef MEMEX_MATRIX_H_
#define MEMEX_MATRIX_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace memex {

// Dense row-major matrix of doubles. Vectors are 1×n matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  Matrix(int rows, int cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix RowVector(std::span<const double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(int r, int c) { return data_[Index(r, c)]; }
  double operator()(int r, int c) const { return data_[Index(r, c)]; }
  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(int r) { return {data_.data() + Index(r, 0), std::size_t(cols_)}; }
  std::span<const double> row(int r) const {
    return {data_.data() + Index(r, 0), std::size_t(cols_)};
  }

  bool SameShape(const Matrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  void Fill(double v);
  bool AllFinite() const;
  double MaxAbs() const;
  double Sum() const;

  // Bitwise equality of shape and contents.
  bool operator==(const Matrix &other) const = default;

 private:
  std::size_t Index(int r, int c) const { return std::size_t(r) * cols_ + c; }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Largest absolute elementwise difference; shapes must match.
double MaxAbsDiff(const Matrix &a, const Matrix &b);

}  // namespace memex

#endif  // MEMEX_MATRIX_H_
