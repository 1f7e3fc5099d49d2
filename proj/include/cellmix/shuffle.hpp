#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cellmix/error.hpp"
#include "cellmix/rng.hpp"
#include "cellmix/tensor.hpp"

namespace cellmix {

/// Group: one donor image supplies all shuffled patches of a sample.
/// Split: every shuffled position draws its own donor permutation.
enum class ShuffleMode { Group, Split };

inline std::string to_string(ShuffleMode mode) {
  return mode == ShuffleMode::Group ? "group" : "split";
}

/// Partition of the n patch positions into a fixed set F (held in
/// place for every sample of the batch) and the complement R whose
/// contents get shuffled across the batch.
struct FixPositionMask {
  int n = 0;
  double requested_beta = 0.0;
  std::vector<std::uint32_t> fixed;     // sorted
  std::vector<std::uint32_t> relation;  // sorted complement
  std::vector<std::uint8_t> is_fixed;   // n flags

  int fixed_count() const { return static_cast<int>(fixed.size()); }
  double realized_ratio() const {
    return static_cast<double>(fixed.size()) / static_cast<double>(n);
  }
};

/// Fixed-count rule: m = floor(n * beta + 0.5).
inline int fixed_count_for(int n, double beta) {
  return static_cast<int>(std::floor(static_cast<double>(n) * beta + 0.5));
}

/// Draws m = floor(n*beta + 0.5) fixed positions uniformly without
/// replacement. Consumes exactly m bounded draws.
inline FixPositionMask draw_fix_mask(int n, double beta, Rng &rng) {
  if (n < 1) {
    throw DomainError("draw_fix_mask: patch count must be >= 1, got " + std::to_string(n));
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw DomainError("draw_fix_mask: fix ratio must lie in [0, 1], got " +
                      std::to_string(beta));
  }
  const int m = fixed_count_for(n, beta);

  FixPositionMask mask;
  mask.n = n;
  mask.requested_beta = beta;
  mask.fixed = rng.sample_without_replacement(static_cast<std::uint32_t>(n),
                                              static_cast<std::uint32_t>(m));
  mask.is_fixed.assign(static_cast<std::size_t>(n), 0);
  for (auto i : mask.fixed) {
    mask.is_fixed[i] = 1;
  }
  mask.relation.reserve(static_cast<std::size_t>(n - m));
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i) {
    if (!mask.is_fixed[i]) {
      mask.relation.push_back(i);
    }
  }
  return mask;
}

/// All-fixed mask (the beta = 1 degenerate case); consumes no draws.
inline FixPositionMask identity_mask(int n) {
  FixPositionMask mask;
  mask.n = n;
  mask.requested_beta = 1.0;
  mask.fixed.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    mask.fixed[i] = static_cast<std::uint32_t>(i);
  }
  mask.is_fixed.assign(static_cast<std::size_t>(n), 1);
  return mask;
}

/// source[s][i] = batch index of the sample that supplied patch i of
/// output sample s; the audit trail behind every soft label.
class Provenance {
public:
  Provenance(int batch, int patches)
      : batch_(batch), patches_(patches),
        source_(static_cast<std::size_t>(batch) * patches) {
    for (int s = 0; s < batch; ++s) {
      for (int i = 0; i < patches; ++i) {
        at(s, i) = static_cast<std::uint32_t>(s);
      }
    }
  }

  int batch() const { return batch_; }
  int patches() const { return patches_; }

  std::uint32_t &at(int sample, int index) {
    return source_[static_cast<std::size_t>(sample) * patches_ + index];
  }
  std::uint32_t at(int sample, int index) const {
    return source_[static_cast<std::size_t>(sample) * patches_ + index];
  }

  std::span<const std::uint32_t> data() const { return source_; }

  bool is_identity() const {
    for (int s = 0; s < batch_; ++s) {
      for (int i = 0; i < patches_; ++i) {
        if (at(s, i) != static_cast<std::uint32_t>(s)) {
          return false;
        }
      }
    }
    return true;
  }

private:
  int batch_, patches_;
  std::vector<std::uint32_t> source_;
};

namespace detail {

inline std::vector<std::uint32_t> draw_permutation(int batch, Rng &rng) {
  std::vector<std::uint32_t> perm(static_cast<std::size_t>(batch));
  for (int s = 0; s < batch; ++s) {
    perm[s] = static_cast<std::uint32_t>(s);
  }
  rng.shuffle(std::span<std::uint32_t>(perm));
  return perm;
}

}  // namespace detail

/// Shuffles relation-position patches across the batch while fixed
/// positions stay in place, byte-exact. Group mode draws one batch
/// permutation; Split mode draws one per relation position, in
/// ascending position order. No permutation is drawn when R is empty.
inline std::pair<ImageBatch, Provenance> in_place_shuffle(const ImageBatch &batch,
                                                          const PatchGrid &grid,
                                                          const FixPositionMask &mask,
                                                          ShuffleMode mode, Rng &rng) {
  if (mask.n != grid.count()) {
    throw DomainError("in_place_shuffle: mask covers " + std::to_string(mask.n) +
                      " patches but grid has " + std::to_string(grid.count()));
  }
  if (grid.rows * grid.patch_size != batch.height() ||
      grid.cols * grid.patch_size != batch.width()) {
    throw DomainError("in_place_shuffle: grid does not match batch dims");
  }

  ImageBatch out = batch;
  Provenance prov(batch.batch(), grid.count());
  if (mask.relation.empty() || batch.batch() == 1) {
    return {std::move(out), std::move(prov)};
  }

  if (mode == ShuffleMode::Group) {
    const auto perm = detail::draw_permutation(batch.batch(), rng);
    for (auto i : mask.relation) {
      for (int s = 0; s < batch.batch(); ++s) {
        const auto donor = perm[s];
        prov.at(s, static_cast<int>(i)) = donor;
        if (donor != static_cast<std::uint32_t>(s)) {
          copy_patch(out, s, batch, static_cast<int>(donor), grid, static_cast<int>(i));
        }
      }
    }
  } else {
    for (auto i : mask.relation) {
      const auto perm = detail::draw_permutation(batch.batch(), rng);
      for (int s = 0; s < batch.batch(); ++s) {
        const auto donor = perm[s];
        prov.at(s, static_cast<int>(i)) = donor;
        if (donor != static_cast<std::uint32_t>(s)) {
          copy_patch(out, s, batch, static_cast<int>(donor), grid, static_cast<int>(i));
        }
      }
    }
  }
  return {std::move(out), std::move(prov)};
}

/// Soft label row s = (1/n) * sum over patches of onehot(source class).
/// With a single donor this reduces to f*y_fixed + (1-f)*y_donor where
/// f is the realized fixed ratio m/n.
inline SoftLabelBatch soft_labels(const Provenance &provenance, const LabelBatch &labels) {
  if (provenance.batch() != labels.batch()) {
    throw DomainError("soft_labels: provenance rows " + std::to_string(provenance.batch()) +
                      " vs labels " + std::to_string(labels.batch()));
  }
  const int n = provenance.patches();
  SoftLabelBatch out(provenance.batch(), labels.num_classes);
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(labels.num_classes));
  for (int s = 0; s < provenance.batch(); ++s) {
    std::fill(counts.begin(), counts.end(), 0u);
    for (int i = 0; i < n; ++i) {
      const auto src = provenance.at(s, i);
      if (src >= static_cast<std::uint32_t>(labels.batch())) {
        throw DomainError("soft_labels: source index " + std::to_string(src) +
                          " out of range");
      }
      counts[labels.labels[src]] += 1;
    }
    for (int c = 0; c < labels.num_classes; ++c) {
      out.at(s, c) =
          static_cast<float>(static_cast<double>(counts[c]) / static_cast<double>(n));
    }
  }
  return out;
}

/// Full augmentation result plus its audit trail.
struct AugmentedBatch {
  ImageBatch images;
  SoftLabelBatch labels;
  Provenance provenance;
  FixPositionMask mask;
  bool triggered = false;
};

/// Runs split -> mask -> shuffle -> soft labels with probability
/// trigger_prob, else returns the inputs untouched (identity
/// provenance, one-hot labels). Draw order: one trigger uniform, then
/// the mask, then the permutations.
inline AugmentedBatch augment_batch(const ImageBatch &batch, const LabelBatch &labels,
                                    double beta, int patch_size, ShuffleMode mode,
                                    double trigger_prob, Rng &rng) {
  if (!(trigger_prob >= 0.0 && trigger_prob <= 1.0)) {
    throw DomainError("augment_batch: trigger probability must lie in [0, 1], got " +
                      std::to_string(trigger_prob));
  }
  if (labels.batch() != batch.batch()) {
    throw DomainError("augment_batch: label count does not match batch");
  }
  const PatchGrid grid = make_patch_grid(batch, patch_size);

  const bool triggered = rng.next_double() < trigger_prob;
  if (!triggered) {
    return AugmentedBatch{batch, SoftLabelBatch::one_hot(labels),
                          Provenance(batch.batch(), grid.count()),
                          identity_mask(grid.count()), false};
  }

  FixPositionMask mask = draw_fix_mask(grid.count(), beta, rng);
  auto [images, provenance] = in_place_shuffle(batch, grid, mask, mode, rng);
  SoftLabelBatch soft = soft_labels(provenance, labels);
  return AugmentedBatch{std::move(images), std::move(soft), std::move(provenance),
                        std::move(mask), true};
}

}  // namespace cellmix
