#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cellmix/error.hpp"
#include "cellmix/rng.hpp"

namespace cellmix {

/// Descending patch sizes, easiest (largest) first.
class PatchSizeSchedule {
public:
  explicit PatchSizeSchedule(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) {
      throw DomainError("patch size schedule: empty list");
    }
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (sizes_[i] < 16) {
        throw DomainError("patch size schedule: entries must be >= 16, got " +
                          std::to_string(sizes_[i]));
      }
      if (i > 0 && sizes_[i] >= sizes_[i - 1]) {
        throw DomainError("patch size schedule: list must be strictly descending");
      }
    }
  }

  static PatchSizeSchedule defaults() {
    return PatchSizeSchedule({192, 128, 96, 64, 48, 32, 16});
  }

  int at(int k) const { return sizes_[clamp_index(k)]; }
  int length() const { return static_cast<int>(sizes_.size()); }
  const std::vector<int> &values() const { return sizes_; }

  void validate_for_side(int side) const {
    for (int p : sizes_) {
      if (side % p != 0) {
        throw DomainError("patch size schedule: " + std::to_string(p) +
                          " does not divide image side " + std::to_string(side));
      }
    }
  }

private:
  std::size_t clamp_index(int k) const {
    return static_cast<std::size_t>(std::clamp(k, 0, length() - 1));
  }

  std::vector<int> sizes_;
};

/// Descending fix-position ratios in (0, 1], easiest (highest) first.
class FixRatioSchedule {
public:
  explicit FixRatioSchedule(std::vector<double> ratios) : ratios_(std::move(ratios)) {
    if (ratios_.empty()) {
      throw DomainError("fix ratio schedule: empty list");
    }
    for (std::size_t i = 0; i < ratios_.size(); ++i) {
      if (!(ratios_[i] > 0.0 && ratios_[i] <= 1.0)) {
        throw DomainError("fix ratio schedule: entries must lie in (0, 1]");
      }
      if (i > 0 && ratios_[i] >= ratios_[i - 1]) {
        throw DomainError("fix ratio schedule: list must be strictly descending");
      }
    }
  }

  static FixRatioSchedule defaults() {
    return FixRatioSchedule({0.9, 0.8, 0.7, 0.6, 0.5});
  }

  double at(int k) const {
    return ratios_[static_cast<std::size_t>(std::clamp(k, 0, length() - 1))];
  }
  int length() const { return static_cast<int>(ratios_.size()); }
  const std::vector<double> &values() const { return ratios_; }

private:
  std::vector<double> ratios_;
};

enum class PolicyKind {
  LossDriveHold,
  LossDriveBack,
  Linear,
  Reverse,
  Random,
  Loop,
  FixedPatch,
  LinearDecayRatio,
  FixedRatio,
};

/// Scheduling policy; Fixed* variants pin one axis while the other
/// keeps following the loss-driven index.
struct SchedulerPolicy {
  PolicyKind kind = PolicyKind::LossDriveHold;
  int pinned_patch = 0;
  double pinned_ratio = 0.0;

  static SchedulerPolicy hold() { return {PolicyKind::LossDriveHold}; }
  static SchedulerPolicy back() { return {PolicyKind::LossDriveBack}; }
  static SchedulerPolicy linear() { return {PolicyKind::Linear}; }
  static SchedulerPolicy reverse() { return {PolicyKind::Reverse}; }
  static SchedulerPolicy random() { return {PolicyKind::Random}; }
  static SchedulerPolicy loop() { return {PolicyKind::Loop}; }
  static SchedulerPolicy linear_decay_ratio() { return {PolicyKind::LinearDecayRatio}; }
  static SchedulerPolicy fixed_patch(int p) {
    SchedulerPolicy policy{PolicyKind::FixedPatch};
    policy.pinned_patch = p;
    return policy;
  }
  static SchedulerPolicy fixed_ratio(double f) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw DomainError("fixed ratio policy: ratio must lie in (0, 1]");
    }
    SchedulerPolicy policy{PolicyKind::FixedRatio};
    policy.pinned_ratio = f;
    return policy;
  }

  /// True for the policies driven by iteration index, not loss.
  bool is_variant() const {
    switch (kind) {
      case PolicyKind::Linear:
      case PolicyKind::Reverse:
      case PolicyKind::Random:
      case PolicyKind::Loop:
      case PolicyKind::LinearDecayRatio:
        return true;
      default:
        return false;
    }
  }
};

inline std::string to_string(const SchedulerPolicy &policy) {
  switch (policy.kind) {
    case PolicyKind::LossDriveHold: return "loss_hold";
    case PolicyKind::LossDriveBack: return "loss_back";
    case PolicyKind::Linear: return "linear";
    case PolicyKind::Reverse: return "reverse";
    case PolicyKind::Random: return "random";
    case PolicyKind::Loop: return "loop";
    case PolicyKind::FixedPatch: return "fixed_patch";
    case PolicyKind::LinearDecayRatio: return "linear_decay_ratio";
    case PolicyKind::FixedRatio: return "fixed_ratio";
  }
  return "unknown";
}

inline SchedulerPolicy policy_from_string(const std::string &name) {
  if (name == "loss_hold") return SchedulerPolicy::hold();
  if (name == "loss_back") return SchedulerPolicy::back();
  if (name == "linear") return SchedulerPolicy::linear();
  if (name == "reverse") return SchedulerPolicy::reverse();
  if (name == "random") return SchedulerPolicy::random();
  if (name == "loop") return SchedulerPolicy::loop();
  if (name == "linear_decay_ratio") return SchedulerPolicy::linear_decay_ratio();
  if (name == "fixed_patch") return {PolicyKind::FixedPatch};
  if (name == "fixed_ratio") return {PolicyKind::FixedRatio};
  throw DomainError("unknown scheduler policy '" + name + "'");
}

/// Difficulty index into both schedules plus the loss threshold and
/// policy. Both axes share one index; unequal list lengths clamp at
/// their own ends.
struct CurriculumState {
  PatchSizeSchedule sizes = PatchSizeSchedule::defaults();
  FixRatioSchedule ratios = FixRatioSchedule::defaults();
  SchedulerPolicy policy = SchedulerPolicy::hold();
  double threshold = 4.0;
  double ema_coeff = 0.0;  // 0 disables loss smoothing
  int k = 0;
  Rng rng{0};  // consumed by the Random policy only

  // EMA accumulator
  bool has_smoothed = false;
  double smoothed_loss = 0.0;

  int k_max() const { return std::max(sizes.length(), ratios.length()) - 1; }
};

/// Current (patch size, fix ratio) under the shared difficulty index.
inline std::pair<int, double> current(const CurriculumState &state) {
  const int p = state.policy.kind == PolicyKind::FixedPatch ? state.policy.pinned_patch
                                                            : state.sizes.at(state.k);
  const double f = state.policy.kind == PolicyKind::FixedRatio ? state.policy.pinned_ratio
                                                               : state.ratios.at(state.k);
  return {p, f};
}

/// Loss-drive update: advance on loss below threshold, otherwise hold
/// or step back one, clamped to [0, k_max]. Fixed-axis policies follow
/// the hold rule for their free axis.
inline CurriculumState loss_drive_step(CurriculumState state, double loss) {
  if (state.policy.is_variant()) {
    throw DomainError("loss_drive_step: policy " + to_string(state.policy) +
                      " is iteration-driven");
  }
  if (!std::isfinite(loss)) {
    throw DomainError("loss_drive_step: non-finite loss");
  }
  if (loss < state.threshold) {
    state.k = std::min(state.k + 1, state.k_max());
  } else if (state.policy.kind == PolicyKind::LossDriveBack) {
    state.k = std::max(state.k - 1, 0);
  }
  return state;
}

/// Iteration-driven update for the ablation policies. Reverse and the
/// per-step ratio decay walk the index from the easy end; Linear walks
/// from the hard end; Random draws a fresh index; Loop cycles.
inline CurriculumState variant_step(CurriculumState state, long iteration) {
  const int top = state.k_max();
  switch (state.policy.kind) {
    case PolicyKind::Reverse:
    case PolicyKind::LinearDecayRatio:
      state.k = static_cast<int>(std::min<long>(iteration, top));
      break;
    case PolicyKind::Linear:
      state.k = static_cast<int>(std::max<long>(top - iteration, 0));
      break;
    case PolicyKind::Random:
      state.k = static_cast<int>(state.rng.bounded(static_cast<std::uint64_t>(top) + 1));
      break;
    case PolicyKind::Loop:
      state.k = static_cast<int>(iteration % (top + 1));
      break;
    default:
      throw DomainError("variant_step: policy " + to_string(state.policy) +
                        " is loss-driven");
  }
  return state;
}

/// One controller update: smooths the loss when EMA is enabled, then
/// dispatches on the policy family.
inline CurriculumState controller_step(CurriculumState state, double loss, long iteration) {
  if (state.policy.is_variant()) {
    return variant_step(std::move(state), iteration);
  }
  double effective = loss;
  if (state.ema_coeff > 0.0) {
    effective = state.has_smoothed
                    ? state.ema_coeff * state.smoothed_loss + (1.0 - state.ema_coeff) * loss
                    : loss;
    state.smoothed_loss = effective;
    state.has_smoothed = true;
  }
  return loss_drive_step(std::move(state), effective);
}

}  // namespace cellmix
