/* Copyright 2026 The bdcgan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BDCGAN_DATAIO_HPP_
#define BDCGAN_DATAIO_HPP_

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <png.h>
#include <zlib.h>

#include "bdcgan/bytes.hpp"
#include "bdcgan/errors.hpp"
#include "bdcgan/generator.hpp"
#include "bdcgan/rng.hpp"
#include "bdcgan/tensor.hpp"

namespace bdcgan {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct Dataset {
  FloatTensor images;       // [N, 1, rows, cols], values in [-1, 1]
  std::vector<int> labels;  // [N], 0..9

  std::size_t size() const { return labels.size(); }
};

// Byte -> [-1, 1] and back. The inverse recovers every byte exactly.
inline float pixel_to_unit(std::uint8_t p) { return static_cast<float>(p) / 127.5f - 1.0f; }
inline std::uint8_t unit_to_pixel(float v) {
  const float s = std::round((std::clamp(v, -1.0f, 1.0f) + 1.0f) * 127.5f);
  return static_cast<std::uint8_t>(std::clamp(s, 0.0f, 255.0f));
}

namespace detail {

// Whole file through zlib, which passes uncompressed input through unchanged.
inline std::vector<std::uint8_t> read_maybe_gz(const std::string& path) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> f(gzopen(path.c_str(), "rb"), &gzclose);
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 20);
  for (;;) {
    const int n = gzread(f.get(), chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) throw FormatError("corrupt compressed data in " + path);
    if (n == 0) break;
    out.insert(out.end(), chunk.begin(), chunk.begin() + n);
  }
  return out;
}

inline std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

}  // namespace detail

inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = detail::read_maybe_gz(images_path);
  const auto lab = detail::read_maybe_gz(labels_path);
  if (img.size() < 16) throw FormatError("truncated IDX image header in " + images_path);
  if (lab.size() < 8) throw FormatError("truncated IDX label header in " + labels_path);
  if (detail::be32(img, 0) != kIdxImagesMagic)
    throw FormatError("bad IDX image magic in " + images_path);
  if (detail::be32(lab, 0) != kIdxLabelsMagic)
    throw FormatError("bad IDX label magic in " + labels_path);
  const std::size_t n = detail::be32(img, 4), rows = detail::be32(img, 8), cols = detail::be32(img, 12);
  if (detail::be32(lab, 4) != n)
    throw FormatError("image count " + std::to_string(n) + " does not match label count " +
                      std::to_string(detail::be32(lab, 4)));
  if (n == 0 || rows == 0 || cols == 0) throw FormatError("empty IDX file");
  if (img.size() < 16 + n * rows * cols) throw FormatError("truncated IDX image data in " + images_path);
  if (lab.size() < 8 + n) throw FormatError("truncated IDX label data in " + labels_path);

  Dataset ds;
  ds.images = FloatTensor({n, 1, rows, cols});
  std::transform(img.begin() + 16, img.begin() + 16 + static_cast<std::ptrdiff_t>(n * rows * cols),
                 ds.images.data().begin(), pixel_to_unit);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[8 + i] > 9) throw FormatError("label " + std::to_string(lab[8 + i]) + " out of range");
    ds.labels[i] = lab[8 + i];
  }
  return ds;
}

// Accepts both the plain and the .gz names of the standard distribution.
inline Dataset load_mnist_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  auto find = [&](const std::string& stem) {
    for (const std::string& name : {stem, stem + ".gz"}) {
      const fs::path p = fs::path(dir) / name;
      if (fs::exists(p)) return p.string();
    }
    throw IoError("no " + stem + "[.gz] in " + dir);
  };
  return load_idx(find("train-images-idx3-ubyte"), find("train-labels-idx1-ubyte"));
}

// Tile [k, 1, h, w] images row-major into a ceil(k / cols) x cols grid and
// write an 8-bit grayscale PGM (".pgm") or PNG (anything else). Unused tiles
// are black.
inline void write_grid(const FloatTensor& images, std::size_t cols, const std::string& path) {
  if (images.rank() != 4 || images.dim(1) != 1)
    throw ShapeError("write_grid expects [k, 1, h, w], got " + to_string(images.shape()));
  if (cols == 0) throw ValueError("write_grid needs cols >= 1");
  const std::size_t k = images.dim(0), h = images.dim(2), w = images.dim(3);
  const std::size_t grid_rows = (k + cols - 1) / cols;
  const std::size_t height = grid_rows * h, width = cols * w;
  std::vector<std::uint8_t> pix(height * width, 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t ty = i / cols, tx = i % cols;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        pix[(ty * h + y) * width + tx * w + x] = unit_to_pixel(images[(i * h + y) * w + x]);
  }

  if (std::filesystem::path(path).extension() == ".pgm") {
    std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), pix.begin(), pix.end());
    write_file(path, out);
    return;
  }

  std::unique_ptr<FILE, decltype(&fclose)> f(std::fopen(path.c_str(), "wb"), &fclose);
  if (!f) throw IoError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < height; ++y) png_write_row(png, pix.data() + y * width);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct Batch {
  FloatTensor images;       // [B, 1, h, w]
  FloatTensor labels;       // [B, classes], one-hot
  std::vector<int> classes;
};

// One epoch of fixed-size batches; the final partial batch is dropped.
class EpochBatches {
 public:
  EpochBatches(const Dataset& ds, std::size_t batch_size, Rng& rng, bool shuffle, std::size_t num_classes = 10)
      : ds_(&ds), batch_size_(batch_size), classes_(num_classes), order_(ds.size()) {
    if (batch_size == 0) throw ValueError("batch size must be >= 1");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (shuffle) {
      for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
    }
  }

  std::size_t size() const { return order_.size() / batch_size_; }

  Batch operator[](std::size_t i) const {
    const std::size_t plane = ds_->images.size() / ds_->size();
    Shape shape = ds_->images.shape();
    shape[0] = batch_size_;
    Batch b{FloatTensor(shape), FloatTensor({batch_size_, classes_}), std::vector<int>(batch_size_)};
    for (std::size_t j = 0; j < batch_size_; ++j) {
      const std::size_t src = order_[i * batch_size_ + j];
      std::copy_n(ds_->images.ptr() + src * plane, plane, b.images.ptr() + j * plane);
      b.classes[j] = ds_->labels[src];
    }
    b.labels = one_hot<float>(b.classes, classes_);
    return b;
  }

 private:
  const Dataset* ds_;
  std::size_t batch_size_;
  std::size_t classes_;
  std::vector<std::size_t> order_;
};

inline EpochBatches batches(const Dataset& ds, std::size_t batch_size, Rng& rng, bool shuffle) {
  return EpochBatches(ds, batch_size, rng, shuffle);
}

// First n images/labels of a dataset.
inline Dataset take_subset(const Dataset& ds, std::size_t n) {
  n = std::min(n, ds.size());
  Shape shape = ds.images.shape();
  const std::size_t plane = ds.images.size() / ds.size();
  shape[0] = n;
  Dataset out;
  out.images = FloatTensor(shape, std::vector<float>(ds.images.ptr(), ds.images.ptr() + n * plane));
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

}  // namespace bdcgan

#endif  // BDCGAN_DATAIO_HPP_
