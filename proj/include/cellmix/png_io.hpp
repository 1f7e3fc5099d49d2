#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <png.h>

#include "cellmix/error.hpp"
#include "cellmix/tensor.hpp"

namespace cellmix {

/// Reads an 8-bit PNG into a single-sample batch with the exact
/// u / 255 pixel mapping. Grayscale maps to 1 channel, color to 3,
/// alpha keeps a 4th.
inline ImageBatch read_png(const std::string &path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw FormatError("png '" + path + "': " + image.message);
  }

  int channels;
  if (image.format & PNG_FORMAT_FLAG_ALPHA) {
    image.format = PNG_FORMAT_RGBA;
    channels = 4;
  } else if (image.format & PNG_FORMAT_FLAG_COLOR) {
    image.format = PNG_FORMAT_RGB;
    channels = 3;
  } else {
    image.format = PNG_FORMAT_GRAY;
    channels = 1;
  }

  const int height = static_cast<int>(image.height);
  const int width = static_cast<int>(image.width);
  std::vector<std::uint8_t> interleaved(static_cast<std::size_t>(height) * width * channels);
  if (!png_image_finish_read(&image, nullptr, interleaved.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw FormatError("png '" + path + "': " + message);
  }

  ImageBatch out(1, channels, height, width);
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w) {
      for (int c = 0; c < channels; ++c) {
        const std::uint8_t u =
            interleaved[(static_cast<std::size_t>(h) * width + w) * channels + c];
        out.at(0, c, h, w) = static_cast<float>(u) / 255.0f;
      }
    }
  }
  return out;
}

/// Writes one sample as an 8-bit PNG: clamp to [0, 1], scale by 255,
/// round to nearest. Channel counts 1, 3, 4 are supported.
inline void write_png(const std::string &path, const ImageBatch &batch, int sample) {
  if (sample < 0 || sample >= batch.batch()) {
    throw DomainError("write_png: sample index out of range");
  }
  const int channels = batch.channels();
  png_uint_32 format;
  switch (channels) {
    case 1: format = PNG_FORMAT_GRAY; break;
    case 3: format = PNG_FORMAT_RGB; break;
    case 4: format = PNG_FORMAT_RGBA; break;
    default:
      throw DomainError("write_png: unsupported channel count " + std::to_string(channels));
  }

  const int height = batch.height();
  const int width = batch.width();
  std::vector<std::uint8_t> interleaved(static_cast<std::size_t>(height) * width * channels);
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w) {
      for (int c = 0; c < channels; ++c) {
        const float v = std::clamp(batch.at(sample, c, h, w), 0.0f, 1.0f);
        interleaved[(static_cast<std::size_t>(h) * width + w) * channels + c] =
            static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
    }
  }

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, interleaved.data(), 0, nullptr)) {
    throw FormatError("png '" + path + "': " + image.message);
  }
}

}  // namespace cellmix
