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

#ifndef MEMEX_IMAGE_H_
#define MEMEX_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace memex {

// RGB image, 3×W×H, channel-major then row-major, values in [0, 1].
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  float at(int channel, int y, int x) const { return data_[Index(channel, y, x)]; }
  float &at(int channel, int y, int x) { return data_[Index(channel, y, x)]; }
  const std::vector<float> &data() const { return data_; }

  bool operator==(const ImageTensor &) const = default;

 private:
  std::size_t Index(int c, int y, int x) const {
    return (std::size_t(c) * height_ + y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// Binary evidence mask, 1×W×H, row-major.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  std::uint8_t at(int y, int x) const { return data_[std::size_t(y) * width_ + x]; }
  void set(int y, int x, bool on) { data_[std::size_t(y) * width_ + x] = on ? 1 : 0; }
  std::uint8_t operator[](std::size_t i) const { return data_[i]; }
  void set(std::size_t i, bool on) { data_[i] = on ? 1 : 0; }
  const std::vector<std::uint8_t> &data() const { return data_; }

  bool SameShape(const BinaryMask &o) const { return width_ == o.width_ && height_ == o.height_; }
  std::size_t Foreground() const;

  bool operator==(const BinaryMask &) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// PNG decoding to RGB in [0, 1]. Throws DataError.
ImageTensor ReadImagePng(const std::filesystem::path &path);
void WriteImagePng(const std::filesystem::path &path, const ImageTensor &image);

// Single-channel 8-bit PNG with 0 ↔ 0 and 255 ↔ 1; any other pixel value,
// colour, or alpha channel is a DataError.
BinaryMask ReadMaskPng(const std::filesystem::path &path);
void WriteMaskPng(const std::filesystem::path &path, const BinaryMask &mask);

// Raw 8-bit RGB buffer (row-major, interleaved) to PNG.
void WriteRgbPng(const std::filesystem::path &path, int width, int height,
                 const std::vector<std::uint8_t> &rgb);

}  // namespace memex

#endif  // MEMEX_IMAGE_H_
