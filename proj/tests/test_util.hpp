#pragma once

// Shared helpers for the test suites. The replay and recount routines
// are deliberately naive re-derivations (plain pixel loops, integer
// counting) kept independent of the library's copy paths so they can
// serve as oracles.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cellmix/rng.hpp"
#include "cellmix/shuffle.hpp"
#include "cellmix/tensor.hpp"

namespace testutil {

inline cellmix::ImageBatch random_batch(int b, int c, int h, int w, cellmix::Rng &rng) {
  cellmix::ImageBatch batch(b, c, h, w);
  for (auto &v : batch.data()) {
    v = static_cast<float>(rng.next_double());
  }
  return batch;
}

/// Rebuilds the shuffled batch from provenance with per-pixel loops.
inline cellmix::ImageBatch replay_provenance(const cellmix::ImageBatch &input, int patch_size,
                                             const cellmix::Provenance &prov) {
  const int cols = input.width() / patch_size;
  cellmix::ImageBatch out(input.batch(), input.channels(), input.height(), input.width());
  for (int s = 0; s < input.batch(); ++s) {
    for (int i = 0; i < prov.patches(); ++i) {
      const int src = static_cast<int>(prov.at(s, i));
      const int h0 = (i / cols) * patch_size;
      const int w0 = (i % cols) * patch_size;
      for (int c = 0; c < input.channels(); ++c) {
        for (int dh = 0; dh < patch_size; ++dh) {
          for (int dw = 0; dw < patch_size; ++dw) {
            out.at(s, c, h0 + dh, w0 + dw) = input.at(src, c, h0 + dh, w0 + dw);
          }
        }
      }
    }
  }
  return out;
}

/// Per-class patch counts for one provenance row, divided by n.
inline std::vector<double> recount_row(const cellmix::Provenance &prov,
                                       const cellmix::LabelBatch &labels, int sample) {
  std::vector<long> counts(static_cast<std::size_t>(labels.num_classes), 0);
  for (int i = 0; i < prov.patches(); ++i) {
    counts[labels.labels[prov.at(sample, i)]] += 1;
  }
  std::vector<double> out(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    out[c] = static_cast<double>(counts[c]) / static_cast<double>(prov.patches());
  }
  return out;
}

inline bool same_bytes(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

/// FNV-1a over the raw bytes of one patch; used for multiset checks.
inline std::uint64_t patch_hash(const cellmix::ImageBatch &batch, int sample,
                                const cellmix::PatchGrid &grid, int index) {
  std::uint64_t h = 1469598103934665603ull;
  const int p = grid.patch_size;
  const int h0 = grid.row_of(index) * p;
  const int w0 = grid.col_of(index) * p;
  for (int c = 0; c < batch.channels(); ++c) {
    for (int dh = 0; dh < p; ++dh) {
      const float *row = batch.row(sample, c, h0 + dh) + w0;
      const auto *bytes = reinterpret_cast<const unsigned char *>(row);
      for (std::size_t i = 0; i < static_cast<std::size_t>(p) * sizeof(float); ++i) {
        h = (h ^ bytes[i]) * 1099511628211ull;
      }
    }
  }
  return h;
}

inline std::string read_file_bytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
