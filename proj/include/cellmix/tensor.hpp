#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "cellmix/error.hpp"

namespace cellmix {

/// Dense batch of images, real32, row-major (B, C, H, W).
class ImageBatch {
public:
  ImageBatch(int batch, int channels, int height, int width)
      : batch_(batch), channels_(channels), height_(height), width_(width) {
    if (batch < 1 || channels < 1 || height < 1 || width < 1) {
      throw DomainError("ImageBatch: dims must be positive, got (" + std::to_string(batch) +
                        ", " + std::to_string(channels) + ", " + std::to_string(height) + ", " +
                        std::to_string(width) + ")");
    }
    data_.assign(static_cast<std::size_t>(batch) * channels * height * width, 0.0f);
  }

  ImageBatch(int batch, int channels, int height, int width, std::vector<float> data)
      : ImageBatch(batch, channels, height, width) {
    if (data.size() != data_.size()) {
      throw DomainError("ImageBatch: buffer length " + std::to_string(data.size()) +
                        " does not match B*C*H*W = " + std::to_string(data_.size()));
    }
    data_ = std::move(data);
    validate_finite();
  }

  int batch() const { return batch_; }
  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  float &at(int b, int c, int h, int w) { return data_[index(b, c, h, w)]; }
  float at(int b, int c, int h, int w) const { return data_[index(b, c, h, w)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  /// Pointer to the first pixel of row h in channel c of sample b.
  float *row(int b, int c, int h) { return data_.data() + index(b, c, h, 0); }
  const float *row(int b, int c, int h) const { return data_.data() + index(b, c, h, 0); }

  bool same_shape(const ImageBatch &other) const {
    return batch_ == other.batch_ && channels_ == other.channels_ &&
           height_ == other.height_ && width_ == other.width_;
  }

  void validate_finite() const {
    for (float v : data_) {
      if (!std::isfinite(v)) {
        throw DomainError("ImageBatch: non-finite pixel value");
      }
    }
  }

private:
  std::size_t index(int b, int c, int h, int w) const {
    return ((static_cast<std::size_t>(b) * channels_ + c) * height_ + h) * width_ + w;
  }

  int batch_, channels_, height_, width_;
  std::vector<float> data_;
};

/// 8-bit pixels map to real32 as u / 255 exactly.
inline ImageBatch from_u8(int batch, int channels, int height, int width,
                          std::span<const std::uint8_t> bytes) {
  const auto expected =
      static_cast<std::size_t>(batch) * channels * height * width;
  if (bytes.size() != expected) {
    throw DomainError("from_u8: byte count " + std::to_string(bytes.size()) +
                      " does not match dims");
  }
  std::vector<float> data(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    data[i] = static_cast<float>(bytes[i]) / 255.0f;
  }
  return ImageBatch(batch, channels, height, width, std::move(data));
}

/// Regular patch grid over an image plane. Patch indices run row-major
/// over the grid: left to right, then top to bottom.
struct PatchGrid {
  int patch_size = 0;
  int rows = 0;
  int cols = 0;

  int count() const { return rows * cols; }
  int row_of(int index) const { return index / cols; }
  int col_of(int index) const { return index % cols; }
};

inline PatchGrid make_patch_grid(int height, int width, int patch_size) {
  if (patch_size < 1) {
    throw DomainError("patch grid: patch size must be positive, got " +
                      std::to_string(patch_size));
  }
  if (height % patch_size != 0 || width % patch_size != 0) {
    throw DomainError("patch grid: patch size " + std::to_string(patch_size) +
                      " does not divide image dims " + std::to_string(height) + "x" +
                      std::to_string(width));
  }
  return PatchGrid{patch_size, height / patch_size, width / patch_size};
}

inline PatchGrid make_patch_grid(const ImageBatch &batch, int patch_size) {
  return make_patch_grid(batch.height(), batch.width(), patch_size);
}

/// Copies patch `index` of sample `src_sample` in `src` onto sample
/// `dst_sample` of `dst`. Batches must share shape matching the grid.
inline void copy_patch(ImageBatch &dst, int dst_sample, const ImageBatch &src, int src_sample,
                       const PatchGrid &grid, int index) {
  const int p = grid.patch_size;
  const int h0 = grid.row_of(index) * p;
  const int w0 = grid.col_of(index) * p;
  for (int c = 0; c < src.channels(); ++c) {
    for (int dh = 0; dh < p; ++dh) {
      std::memcpy(dst.row(dst_sample, c, h0 + dh) + w0, src.row(src_sample, c, h0 + dh) + w0,
                  static_cast<std::size_t>(p) * sizeof(float));
    }
  }
}

/// Materialized patches of a batch: one (C, p, p) row-major buffer per
/// (sample, patch index). Entries may be absent until set.
class PatchSet {
public:
  PatchSet(PatchGrid grid, int batch, int channels)
      : grid_(grid), batch_(batch), channels_(channels),
        patches_(static_cast<std::size_t>(batch) * grid.count()) {}

  const PatchGrid &grid() const { return grid_; }
  int batch() const { return batch_; }
  int channels() const { return channels_; }
  std::size_t patch_elements() const {
    return static_cast<std::size_t>(channels_) * grid_.patch_size * grid_.patch_size;
  }

  void set(int sample, int index, std::vector<float> values) {
    if (values.size() != patch_elements()) {
      throw DomainError("PatchSet::set: patch buffer has " + std::to_string(values.size()) +
                        " elements, expected " + std::to_string(patch_elements()));
    }
    auto &slot = patches_[slot_index(sample, index)];
    slot = std::move(values);
    slot.shrink_to_fit();
  }

  /// The p x p x C sub-tensor of sample `sample` at patch `index`.
  const std::vector<float> &at(int sample, int index) const {
    const auto &slot = patches_[slot_index(sample, index)];
    if (slot.empty() && patch_elements() != 0) {
      throw DomainError("PatchSet::at: missing patch (" + std::to_string(sample) + ", " +
                        std::to_string(index) + ")");
    }
    return slot;
  }

  bool has(int sample, int index) const {
    return !patches_[slot_index(sample, index)].empty();
  }

private:
  std::size_t slot_index(int sample, int index) const {
    if (sample < 0 || sample >= batch_ || index < 0 || index >= grid_.count()) {
      throw DomainError("PatchSet: sample/index out of range");
    }
    return static_cast<std::size_t>(sample) * grid_.count() + index;
  }

  PatchGrid grid_;
  int batch_;
  int channels_;
  std::vector<std::vector<float>> patches_;
};

inline std::vector<float> extract_patch(const ImageBatch &batch, const PatchGrid &grid,
                                        int sample, int index) {
  const int p = grid.patch_size;
  const int h0 = grid.row_of(index) * p;
  const int w0 = grid.col_of(index) * p;
  std::vector<float> out(static_cast<std::size_t>(batch.channels()) * p * p);
  float *dst = out.data();
  for (int c = 0; c < batch.channels(); ++c) {
    for (int dh = 0; dh < p; ++dh) {
      std::memcpy(dst, batch.row(sample, c, h0 + dh) + w0,
                  static_cast<std::size_t>(p) * sizeof(float));
      dst += p;
    }
  }
  return out;
}

/// Splits every sample into its grid patches. The returned set holds
/// all B*n patches; together with the grid it is the indexed accessor
/// over the split.
inline PatchSet split_into_patches(const ImageBatch &batch, int patch_size) {
  const PatchGrid grid = make_patch_grid(batch, patch_size);
  PatchSet set(grid, batch.batch(), batch.channels());
  for (int s = 0; s < batch.batch(); ++s) {
    for (int i = 0; i < grid.count(); ++i) {
      set.set(s, i, extract_patch(batch, grid, s, i));
    }
  }
  return set;
}

/// Inverse of split_into_patches; bit-exact roundtrip. Every patch of
/// every sample must be present.
inline ImageBatch reassemble(const PatchSet &patches) {
  const PatchGrid &grid = patches.grid();
  const int p = grid.patch_size;
  ImageBatch out(patches.batch(), patches.channels(), grid.rows * p, grid.cols * p);
  for (int s = 0; s < patches.batch(); ++s) {
    for (int i = 0; i < grid.count(); ++i) {
      const std::vector<float> &buf = patches.at(s, i);  // throws if missing
      const int h0 = grid.row_of(i) * p;
      const int w0 = grid.col_of(i) * p;
      const float *src = buf.data();
      for (int c = 0; c < patches.channels(); ++c) {
        for (int dh = 0; dh < p; ++dh) {
          std::memcpy(out.row(s, c, h0 + dh) + w0, src,
                      static_cast<std::size_t>(p) * sizeof(float));
          src += p;
        }
      }
    }
  }
  return out;
}

/// Reorders samples: output sample s is input sample order[s].
inline ImageBatch gather_samples(const ImageBatch &batch, std::span<const std::uint32_t> order) {
  if (order.size() != static_cast<std::size_t>(batch.batch())) {
    throw DomainError("gather_samples: order length does not match batch");
  }
  ImageBatch out(batch.batch(), batch.channels(), batch.height(), batch.width());
  const std::size_t per_sample =
      static_cast<std::size_t>(batch.channels()) * batch.height() * batch.width();
  for (int s = 0; s < batch.batch(); ++s) {
    if (order[s] >= static_cast<std::uint32_t>(batch.batch())) {
      throw DomainError("gather_samples: index out of range");
    }
    std::memcpy(out.data().data() + per_sample * s,
                batch.data().data() + per_sample * order[s], per_sample * sizeof(float));
  }
  return out;
}

/// Integer class index per sample plus the class count.
struct LabelBatch {
  std::vector<std::uint32_t> labels;
  int num_classes = 0;

  LabelBatch() = default;
  LabelBatch(std::vector<std::uint32_t> values, int classes)
      : labels(std::move(values)), num_classes(classes) {
    if (classes < 2) {
      throw DomainError("LabelBatch: need at least 2 classes, got " + std::to_string(classes));
    }
    for (auto v : labels) {
      if (v >= static_cast<std::uint32_t>(classes)) {
        throw DomainError("LabelBatch: label " + std::to_string(v) + " out of range [0, " +
                          std::to_string(classes) + ")");
      }
    }
  }

  int batch() const { return static_cast<int>(labels.size()); }
};

/// Per-sample probability vectors over classes, rows summing to 1.
class SoftLabelBatch {
public:
  SoftLabelBatch(int batch, int classes)
      : batch_(batch), classes_(classes),
        weights_(static_cast<std::size_t>(batch) * classes, 0.0f) {
    if (batch < 1 || classes < 2) {
      throw DomainError("SoftLabelBatch: need batch >= 1 and classes >= 2");
    }
  }

  static SoftLabelBatch one_hot(const LabelBatch &labels) {
    SoftLabelBatch out(labels.batch(), labels.num_classes);
    for (int s = 0; s < labels.batch(); ++s) {
      out.at(s, static_cast<int>(labels.labels[s])) = 1.0f;
    }
    return out;
  }

  int batch() const { return batch_; }
  int num_classes() const { return classes_; }

  float &at(int sample, int cls) {
    return weights_[static_cast<std::size_t>(sample) * classes_ + cls];
  }
  float at(int sample, int cls) const {
    return weights_[static_cast<std::size_t>(sample) * classes_ + cls];
  }

  std::span<const float> row(int sample) const {
    return {weights_.data() + static_cast<std::size_t>(sample) * classes_,
            static_cast<std::size_t>(classes_)};
  }
  std::span<float> data() { return weights_; }
  std::span<const float> data() const { return weights_; }

  /// Reorders rows: output row s is input row order[s].
  SoftLabelBatch gather_rows(std::span<const std::uint32_t> order) const {
    if (order.size() != static_cast<std::size_t>(batch_)) {
      throw DomainError("gather_rows: order length does not match batch");
    }
    SoftLabelBatch out(batch_, classes_);
    for (int s = 0; s < batch_; ++s) {
      if (order[s] >= static_cast<std::uint32_t>(batch_)) {
        throw DomainError("gather_rows: index out of range");
      }
      for (int c = 0; c < classes_; ++c) {
        out.at(s, c) = at(static_cast<int>(order[s]), c);
      }
    }
    return out;
  }

  /// Rows must sum to 1 within 1e-6 with entries in [0, 1].
  void validate() const {
    for (int s = 0; s < batch_; ++s) {
      double sum = 0.0;
      for (int c = 0; c < classes_; ++c) {
        const float w = at(s, c);
        if (!(w >= 0.0f && w <= 1.0f)) {
          throw DomainError("SoftLabelBatch: weight outside [0, 1]");
        }
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw DomainError("SoftLabelBatch: row " + std::to_string(s) +
                          " sums to " + std::to_string(sum));
      }
    }
  }

private:
  int batch_, classes_;
  std::vector<float> weights_;
};

}  // namespace cellmix
