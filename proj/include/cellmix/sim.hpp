#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cellmix/curriculum.hpp"
#include "cellmix/error.hpp"
#include "cellmix/rng.hpp"
#include "cellmix/shuffle.hpp"
#include "cellmix/tensor.hpp"

namespace cellmix {

/// Scripted sequence of per-iteration losses.
struct LossTrace {
  std::vector<double> losses;

  explicit LossTrace(std::vector<double> values) : losses(std::move(values)) {
    for (double l : losses) {
      if (!std::isfinite(l) || l < 0.0) {
        throw DomainError("LossTrace: losses must be finite and non-negative");
      }
    }
  }
};

/// Parses one loss value per non-empty line. Reports the offending
/// line number on failure.
inline LossTrace parse_loss_trace(std::istream &in) {
  std::vector<double> losses;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    try {
      std::size_t consumed = 0;
      const double value = std::stod(line, &consumed);
      if (line.find_first_not_of(" \t", consumed) != std::string::npos) {
        throw std::invalid_argument("trailing characters");
      }
      if (!std::isfinite(value) || value < 0.0) {
        throw FormatError("loss trace line " + std::to_string(line_number) +
                          ": losses must be finite and non-negative");
      }
      losses.push_back(value);
    } catch (const std::invalid_argument &) {
      throw FormatError("loss trace line " + std::to_string(line_number) +
                        ": cannot parse '" + line + "' as a loss value");
    } catch (const std::out_of_range &) {
      throw FormatError("loss trace line " + std::to_string(line_number) +
                        ": value out of range");
    }
  }
  if (losses.empty()) {
    throw FormatError("loss trace: no loss values found");
  }
  return LossTrace(std::move(losses));
}

/// Loss generator a * exp(-t / tau) + Gaussian noise, clamped at 0.
/// No weights, no gradients; it exists to drive the controller.
struct SyntheticLearner {
  double initial_loss = 8.0;
  double tau = 10.0;
  double sigma = 0.0;

  SyntheticLearner(double a, double decay_tau, double noise_sigma)
      : initial_loss(a), tau(decay_tau), sigma(noise_sigma) {
    if (!(initial_loss > 0.0) || !(tau > 0.0) || !(sigma >= 0.0)) {
      throw DomainError("SyntheticLearner: need a > 0, tau > 0, sigma >= 0");
    }
  }

  /// Noise draws consume two words (Box-Muller) only when sigma > 0.
  double loss_at(long step, Rng &rng) const {
    double value = initial_loss * std::exp(-static_cast<double>(step) / tau);
    if (sigma > 0.0) {
      const double u1 = rng.next_double();
      const double u2 = rng.next_double();
      const double z =
          std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
      value += sigma * z;
    }
    return std::max(value, 0.0);
  }
};

struct StepRecord {
  long step = 0;
  double loss = 0.0;
  int k = 0;
  int patch_size = 0;
  double fix_ratio = 0.0;
  bool triggered = false;
};

namespace detail {

inline std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

}  // namespace detail

/// Per-step trail of a controller run plus roll-up stats.
struct RunReport {
  std::string policy;
  int k_max = 0;
  std::vector<StepRecord> records;

  long steps() const { return static_cast<long>(records.size()); }

  long triggered_steps() const {
    long count = 0;
    for (const auto &r : records) {
      count += r.triggered ? 1 : 0;
    }
    return count;
  }

  std::vector<long> steps_at_difficulty() const {
    std::vector<long> counts(static_cast<std::size_t>(k_max) + 1, 0);
    for (const auto &r : records) {
      counts[static_cast<std::size_t>(r.k)] += 1;
    }
    return counts;
  }

  /// Roll-up as a JSON object (pretty-printed, trailing newline).
  std::string summary_json() const {
    nlohmann::ordered_json doc;
    doc["policy"] = policy;
    doc["steps"] = steps();
    doc["triggered_steps"] = triggered_steps();
    doc["steps_at_difficulty"] = steps_at_difficulty();
    nlohmann::ordered_json final_state;
    if (!records.empty()) {
      const StepRecord &last = records.back();
      final_state["k"] = last.k;
      final_state["patch_size"] = last.patch_size;
      final_state["fix_ratio"] = last.fix_ratio;
    }
    doc["final"] = final_state;
    return doc.dump(2) + "\n";
  }

  /// One line per step: step,loss,k,patch_size,fix_ratio,policy
  std::string to_csv() const {
    std::ostringstream out;
    out << "step,loss,k,patch_size,fix_ratio,policy\n";
    for (const auto &r : records) {
      out << r.step << ',' << detail::format_number(r.loss) << ',' << r.k << ','
          << r.patch_size << ',' << detail::format_number(r.fix_ratio) << ',' << policy
          << '\n';
    }
    return out.str();
  }
};

/// Replays a scripted loss trace through the controller.
inline RunReport run_controller(const LossTrace &trace, CurriculumState state) {
  if (trace.losses.empty()) {
    throw DomainError("run_controller: empty loss trace");
  }
  RunReport report;
  report.policy = to_string(state.policy);
  report.k_max = state.k_max();
  report.records.reserve(trace.losses.size());
  for (long t = 0; t < static_cast<long>(trace.losses.size()); ++t) {
    const double loss = trace.losses[static_cast<std::size_t>(t)];
    state = controller_step(std::move(state), loss, t);
    const auto [p, f] = current(state);
    report.records.push_back(StepRecord{t, loss, state.k, p, f, false});
  }
  return report;
}

/// Reproducible synthetic batch: per-class base level plus low
/// amplitude per-pixel texture, labels uniform over the classes.
/// Stream order: B label draws, then pixels sample by sample.
inline std::pair<ImageBatch, LabelBatch> generate_batch(int batch, int channels, int side,
                                                        int classes, Rng &rng) {
  if (side < 16 || side % 16 != 0) {
    throw DomainError("generate_batch: image side must be a positive multiple of 16, got " +
                      std::to_string(side));
  }
  if (classes < 2) {
    throw DomainError("generate_batch: need at least 2 classes");
  }
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(batch));
  for (auto &label : labels) {
    label = static_cast<std::uint32_t>(rng.bounded(static_cast<std::uint64_t>(classes)));
  }
  ImageBatch images(batch, channels, side, side);
  auto data = images.data();
  std::size_t pos = 0;
  const std::size_t per_sample = static_cast<std::size_t>(channels) * side * side;
  for (int s = 0; s < batch; ++s) {
    const double base = static_cast<double>(labels[static_cast<std::size_t>(s)] + 1) /
                        static_cast<double>(classes + 1);
    for (std::size_t i = 0; i < per_sample; ++i) {
      data[pos++] = static_cast<float>(0.9 * base + 0.1 * rng.next_double());
    }
  }
  return {std::move(images), LabelBatch(std::move(labels), classes)};
}

/// Augmentation settings for the simulated loop.
struct SimBatchConfig {
  int batch = 8;
  int channels = 3;
  int side = 384;
  int classes = 2;
  double trigger_prob = 0.5;
  ShuffleMode mode = ShuffleMode::Group;
};

/// Runs the controller against a synthetic learner for `steps`
/// iterations; every step also augments a generated batch at the
/// emitted (patch size, fix ratio) so the whole pipeline executes.
inline RunReport simulate_training(const SyntheticLearner &learner, CurriculumState state,
                                   long steps, const SimBatchConfig &config,
                                   std::uint64_t seed) {
  if (steps < 1) {
    throw DomainError("simulate_training: steps must be >= 1");
  }
  Rng rng(seed);
  auto [images, labels] =
      generate_batch(config.batch, config.channels, config.side, config.classes, rng);

  RunReport report;
  report.policy = to_string(state.policy);
  report.k_max = state.k_max();
  report.records.reserve(static_cast<std::size_t>(steps));
  for (long t = 0; t < steps; ++t) {
    const double loss = learner.loss_at(t, rng);
    state = controller_step(std::move(state), loss, t);
    const auto [p, f] = current(state);
    const AugmentedBatch augmented =
        augment_batch(images, labels, f, p, config.mode, config.trigger_prob, rng);
    report.records.push_back(StepRecord{t, loss, state.k, p, f, augmented.triggered});
  }
  return report;
}

/// Resamples the labels of exactly floor(B * ratio + 0.5) samples,
/// chosen without replacement, uniformly over [0, classes). A resample
/// may coincide with the original label.
inline LabelBatch corrupt_labels(const LabelBatch &labels, double ratio, Rng &rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw DomainError("corrupt_labels: ratio must lie in [0, 1], got " +
                      std::to_string(ratio));
  }
  const auto count = static_cast<std::uint32_t>(
      std::floor(static_cast<double>(labels.batch()) * ratio + 0.5));
  LabelBatch out = labels;
  const auto selected =
      rng.sample_without_replacement(static_cast<std::uint32_t>(labels.batch()), count);
  for (auto index : selected) {
    out.labels[index] =
        static_cast<std::uint32_t>(rng.bounded(static_cast<std::uint64_t>(labels.num_classes)));
  }
  return out;
}

}  // namespace cellmix
