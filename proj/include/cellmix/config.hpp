#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellmix/curriculum.hpp"
#include "cellmix/error.hpp"
#include "cellmix/shuffle.hpp"

namespace cellmix {

/// Flat run configuration. JSON files must contain only known keys;
/// anything unrecognized is rejected.
struct RunConfig {
  std::vector<int> patch_sizes = {192, 128, 96, 64, 48, 32, 16};
  std::vector<double> fix_ratios = {0.9, 0.8, 0.7, 0.6, 0.5};
  std::string policy = "loss_hold";
  int fixed_patch = 48;     // used by the fixed_patch policy
  double fixed_ratio = 0.5; // used by the fixed_ratio policy
  double threshold = 4.0;
  double trigger_prob = 0.5;
  std::string mode = "group";
  std::uint64_t seed = 0;
  int batch_size = 8;
  int image_side = 384;
  double loss_ema = 0.0;

  ShuffleMode shuffle_mode() const {
    if (mode == "group") return ShuffleMode::Group;
    if (mode == "split") return ShuffleMode::Split;
    throw DomainError("config: mode must be 'group' or 'split', got '" + mode + "'");
  }

  SchedulerPolicy scheduler_policy() const {
    SchedulerPolicy parsed = policy_from_string(policy);
    if (parsed.kind == PolicyKind::FixedPatch) {
      parsed.pinned_patch = fixed_patch;
    } else if (parsed.kind == PolicyKind::FixedRatio) {
      parsed = SchedulerPolicy::fixed_ratio(fixed_ratio);
    }
    return parsed;
  }

  /// Cross-checks every field against its module's invariants.
  void validate() const {
    const PatchSizeSchedule sizes{patch_sizes};
    sizes.validate_for_side(image_side);
    const FixRatioSchedule ratios{fix_ratios};
    (void)shuffle_mode();
    const SchedulerPolicy parsed = scheduler_policy();
    if (parsed.kind == PolicyKind::FixedPatch && image_side % parsed.pinned_patch != 0) {
      throw DomainError("config: fixed patch size " + std::to_string(parsed.pinned_patch) +
                        " does not divide image side " + std::to_string(image_side));
    }
    if (!(trigger_prob >= 0.0 && trigger_prob <= 1.0)) {
      throw DomainError("config: trigger_prob must lie in [0, 1]");
    }
    if (!std::isfinite(threshold)) {
      throw DomainError("config: threshold must be finite");
    }
    if (!(loss_ema >= 0.0 && loss_ema < 1.0)) {
      throw DomainError("config: loss_ema must lie in [0, 1)");
    }
    if (batch_size < 1) {
      throw DomainError("config: batch_size must be >= 1");
    }
    if (image_side < 16 || image_side % 16 != 0) {
      throw DomainError("config: image_side must be a positive multiple of 16");
    }
  }

  /// Controller state with the configured schedules; `rng_seed` feeds
  /// the Random policy stream.
  CurriculumState make_state(std::uint64_t rng_seed) const {
    CurriculumState state{PatchSizeSchedule{patch_sizes}, FixRatioSchedule{fix_ratios},
                          scheduler_policy(), threshold, loss_ema};
    state.rng = Rng(rng_seed);
    return state;
  }
};

inline RunConfig config_from_json(const nlohmann::json &doc) {
  if (!doc.is_object()) {
    throw FormatError("config: top level must be a JSON object");
  }
  static const std::set<std::string> known = {
      "patch_sizes", "fix_ratios",   "policy",     "fixed_patch", "fixed_ratio",
      "threshold",   "trigger_prob", "mode",       "seed",        "batch_size",
      "image_side",  "loss_ema"};
  for (const auto &[key, value] : doc.items()) {
    if (!known.contains(key)) {
      throw FormatError("config: unknown key '" + key + "'");
    }
  }
  RunConfig config;
  try {
    if (doc.contains("patch_sizes")) config.patch_sizes = doc["patch_sizes"].get<std::vector<int>>();
    if (doc.contains("fix_ratios")) config.fix_ratios = doc["fix_ratios"].get<std::vector<double>>();
    if (doc.contains("policy")) config.policy = doc["policy"].get<std::string>();
    if (doc.contains("fixed_patch")) config.fixed_patch = doc["fixed_patch"].get<int>();
    if (doc.contains("fixed_ratio")) config.fixed_ratio = doc["fixed_ratio"].get<double>();
    if (doc.contains("threshold")) config.threshold = doc["threshold"].get<double>();
    if (doc.contains("trigger_prob")) config.trigger_prob = doc["trigger_prob"].get<double>();
    if (doc.contains("mode")) config.mode = doc["mode"].get<std::string>();
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("batch_size")) config.batch_size = doc["batch_size"].get<int>();
    if (doc.contains("image_side")) config.image_side = doc["image_side"].get<int>();
    if (doc.contains("loss_ema")) config.loss_ema = doc["loss_ema"].get<double>();
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

inline RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open config '" + path + "'");
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception &e) {
    throw FormatError("config '" + path + "': " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace cellmix
