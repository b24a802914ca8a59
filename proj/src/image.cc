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

#include "memex/image.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "memex/errors.h"

namespace memex {
namespace {

struct PngReader {
  png_image image;
  PngReader() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngReader() { png_image_free(&image); }
};

void Begin(PngReader &reader, const std::filesystem::path &path) {
  if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
  if (!png_image_begin_read_from_file(&reader.image, path.c_str())) {
    throw DataError("cannot decode PNG " + path.string() + ": " + reader.image.message);
  }
}

void Finish(PngReader &reader, const std::filesystem::path &path, std::vector<png_byte> &buffer) {
  buffer.resize(PNG_IMAGE_SIZE(reader.image));
  if (!png_image_finish_read(&reader.image, nullptr, buffer.data(), 0, nullptr)) {
    throw DataError("cannot decode PNG " + path.string() + ": " + reader.image.message);
  }
}

void WriteRaw(const std::filesystem::path &path, int width, int height, png_uint_32 format,
              const void *buffer) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = png_uint_32(width);
  image.height = png_uint_32(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer, 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DataError("cannot write PNG " + path.string() + ": " + msg);
  }
}

}  // namespace

ImageTensor::ImageTensor(int width, int height)
    : width_(width), height_(height), data_(std::size_t(3) * width * height, 0.0f) {
  if (width < 1 || height < 1) throw ShapeError("image dimensions must be at least 1x1");
}

BinaryMask::BinaryMask(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), data_(std::size_t(width) * height, fill ? 1 : 0) {
  if (width < 1 || height < 1) throw ShapeError("mask dimensions must be at least 1x1");
}

std::size_t BinaryMask::Foreground() const {
  return std::size_t(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

ImageTensor ReadImagePng(const std::filesystem::path &path) {
  PngReader reader;
  Begin(reader, path);
  reader.image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer;
  Finish(reader, path, buffer);
  const int w = int(reader.image.width), h = int(reader.image.height);
  ImageTensor out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = buffer[(std::size_t(y) * w + x) * 3 + c] / 255.0f;
  return out;
}

void WriteImagePng(const std::filesystem::path &path, const ImageTensor &image) {
  const int w = image.width(), h = image.height();
  std::vector<std::uint8_t> rgb(std::size_t(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image.at(c, y, x), 0.0f, 1.0f);
        rgb[(std::size_t(y) * w + x) * 3 + c] = std::uint8_t(std::lround(v * 255.0f));
      }
  WriteRgbPng(path, w, h, rgb);
}

BinaryMask ReadMaskPng(const std::filesystem::path &path) {
  PngReader reader;
  Begin(reader, path);
  if (reader.image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) {
    throw DataError("mask " + path.string() + " is not a single-channel PNG");
  }
  reader.image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer;
  Finish(reader, path, buffer);
  const int w = int(reader.image.width), h = int(reader.image.height);
  BinaryMask out(w, h);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    if (buffer[i] == 255) {
      out.set(i, true);
    } else if (buffer[i] != 0) {
      throw DataError("non-binary mask pixel value " + std::to_string(int(buffer[i])) + " at (" +
                      std::to_string(i % w) + ", " + std::to_string(i / w) + ") in " +
                      path.string());
    }
  }
  return out;
}

void WriteMaskPng(const std::filesystem::path &path, const BinaryMask &mask) {
  std::vector<std::uint8_t> gray(mask.size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask[i] ? 255 : 0;
  WriteRaw(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, gray.data());
}

void WriteRgbPng(const std::filesystem::path &path, int width, int height,
                 const std::vector<std::uint8_t> &rgb) {
  if (rgb.size() != std::size_t(width) * height * 3) throw ShapeError("RGB buffer size mismatch");
  WriteRaw(path, width, height, PNG_FORMAT_RGB, rgb.data());
}

}  // namespace memex
