#pragma once

#include <cstring>
#include <string>

#include "cellmix/error.hpp"
#include "cellmix/tensor.hpp"

namespace cellmix {

/// Axis-aligned rectangle in pixel coordinates, inclusive of its top
/// left corner; must lie fully inside the image.
struct RectRegion {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  long area() const { return static_cast<long>(height) * width; }

  void validate_within(int image_height, int image_width) const {
    if (top < 0 || left < 0 || height < 1 || width < 1 ||
        top + height > image_height || left + width > image_width) {
      throw DomainError("RectRegion: region (" + std::to_string(top) + ", " +
                        std::to_string(left) + ", " + std::to_string(height) + ", " +
                        std::to_string(width) + ") does not fit inside " +
                        std::to_string(image_height) + "x" + std::to_string(image_width));
    }
  }
};

/// lambda * y1 + (1 - lambda) * y2, row-wise.
inline SoftLabelBatch blend_labels(const SoftLabelBatch &y1, const SoftLabelBatch &y2,
                                   double lambda) {
  if (y1.batch() != y2.batch() || y1.num_classes() != y2.num_classes()) {
    throw DomainError("blend_labels: shape mismatch");
  }
  if (lambda == 1.0) return y1;
  if (lambda == 0.0) return y2;
  SoftLabelBatch out(y1.batch(), y1.num_classes());
  for (int s = 0; s < y1.batch(); ++s) {
    for (int c = 0; c < y1.num_classes(); ++c) {
      out.at(s, c) = static_cast<float>(lambda * y1.at(s, c) + (1.0 - lambda) * y2.at(s, c));
    }
  }
  return out;
}

/// Pixel-wise weighted combination lambda * x1 + (1 - lambda) * x2.
/// lambda 0 and 1 are exact passthroughs.
inline ImageBatch mixup_images(const ImageBatch &x1, const ImageBatch &x2, double lambda) {
  if (!x1.same_shape(x2)) {
    throw DomainError("mixup: shape mismatch");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("mixup: lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  if (lambda == 1.0) return x1;
  if (lambda == 0.0) return x2;
  ImageBatch out = x1;
  auto dst = out.data();
  auto a = x1.data();
  auto b = x2.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<float>(lambda * a[i] + (1.0 - lambda) * b[i]);
  }
  return out;
}

struct MixedBatch {
  ImageBatch images;
  SoftLabelBatch labels;
};

inline MixedBatch mixup(const ImageBatch &x1, const ImageBatch &x2, const SoftLabelBatch &y1,
                        const SoftLabelBatch &y2, double lambda) {
  return {mixup_images(x1, x2, lambda), blend_labels(y1, y2, lambda)};
}

/// Fills the region with a constant; labels are untouched by contract.
inline ImageBatch cutout(const ImageBatch &x, const RectRegion &region, float fill = 0.0f) {
  region.validate_within(x.height(), x.width());
  ImageBatch out = x;
  for (int s = 0; s < out.batch(); ++s) {
    for (int c = 0; c < out.channels(); ++c) {
      for (int h = region.top; h < region.top + region.height; ++h) {
        float *row = out.row(s, c, h) + region.left;
        for (int w = 0; w < region.width; ++w) {
          row[w] = fill;
        }
      }
    }
  }
  return out;
}

/// Region pixels come from x2, the rest from x1; the label weight of
/// x1 is the exact uncovered pixel fraction 1 - area / (H * W).
inline MixedBatch cutmix(const ImageBatch &x1, const ImageBatch &x2, const SoftLabelBatch &y1,
                         const SoftLabelBatch &y2, const RectRegion &region) {
  if (!x1.same_shape(x2)) {
    throw DomainError("cutmix: shape mismatch");
  }
  region.validate_within(x1.height(), x1.width());
  ImageBatch out = x1;
  for (int s = 0; s < out.batch(); ++s) {
    for (int c = 0; c < out.channels(); ++c) {
      for (int h = region.top; h < region.top + region.height; ++h) {
        std::memcpy(out.row(s, c, h) + region.left, x2.row(s, c, h) + region.left,
                    static_cast<std::size_t>(region.width) * sizeof(float));
      }
    }
  }
  const double lambda =
      1.0 - static_cast<double>(region.area()) /
                (static_cast<double>(x1.height()) * static_cast<double>(x1.width()));
  return {std::move(out), blend_labels(y1, y2, lambda)};
}

}  // namespace cellmix
