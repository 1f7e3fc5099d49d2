// Command-line surface over the cellmix library: synthetic batch
// generation, the in-place shuffle augmentation, baseline mixers,
// curriculum traces, the simulated training loop, label corruption,
// TBF inspection, and PNG conversion.
//
// Exit codes: 0 ok, 2 usage, 3 malformed file, 4 domain error.

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cellmix/cellmix.hpp"
#include "cellmix/png_io.hpp"

namespace {

using namespace cellmix;

void write_text(const std::string &path, const std::string &content) {
  detail::atomic_write(path, content);
}

LabelBatch load_labels(const std::string &path, int classes) {
  const auto raw = as_raw_labels(read_tbf(path));
  int cls = classes;
  if (cls == 0) {
    std::uint32_t top = 0;
    for (auto v : raw) {
      top = std::max(top, v);
    }
    cls = std::max<int>(static_cast<int>(top) + 1, 2);
  }
  return LabelBatch(raw, cls);
}

ImageBatch load_images(const std::string &path) {
  return as_image_batch(read_tbf(path));
}

struct GenArgs {
  int batch = 8;
  int channels = 3;
  int side = 384;
  int classes = 2;
  std::uint64_t seed = 0;
  std::string out_prefix;
};

int run_gen(const GenArgs &args) {
  Rng rng(args.seed);
  auto [images, labels] =
      generate_batch(args.batch, args.channels, args.side, args.classes, rng);
  write_tbf(args.out_prefix + "_images.tbf", images);
  write_tbf(args.out_prefix + "_labels.tbf", labels);
  std::printf("wrote %s_images.tbf (%d,%d,%d,%d) and %s_labels.tbf (cls=%d)\n",
              args.out_prefix.c_str(), args.batch, args.channels, args.side, args.side,
              args.out_prefix.c_str(), args.classes);
  return 0;
}

struct AugmentArgs {
  std::string config_path;
  std::string images_path;
  std::string labels_path;
  std::string out_prefix;
  std::uint64_t seed = 0;
  int classes = 0;
  std::optional<double> beta;
  std::optional<int> patch_size;
  std::optional<double> trigger;
  std::optional<std::string> mode;
};

int run_augment(const AugmentArgs &args) {
  RunConfig config = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  if (args.mode) config.mode = *args.mode;
  if (args.trigger) config.trigger_prob = *args.trigger;
  config.validate();

  const double beta = args.beta.value_or(config.fix_ratios.front());
  const int patch = args.patch_size.value_or(config.patch_sizes.front());

  const ImageBatch images = load_images(args.images_path);
  const LabelBatch labels = load_labels(args.labels_path, args.classes);

  Rng rng(args.seed);
  const AugmentedBatch result = augment_batch(images, labels, beta, patch,
                                              config.shuffle_mode(), config.trigger_prob, rng);
  write_tbf(args.out_prefix + "_images.tbf", result.images);
  write_tbf(args.out_prefix + "_softlabels.tbf", result.labels);
  write_tbf(args.out_prefix + "_provenance.tbf", result.provenance);
  std::printf("triggered=%s mode=%s patch=%d n=%d fixed=%d beta=%g realized=%g\n",
              result.triggered ? "yes" : "no", config.mode.c_str(), patch,
              result.mask.n, result.mask.fixed_count(), beta,
              result.mask.realized_ratio());
  return 0;
}

struct BaselineArgs {
  std::string method;
  std::string images_path;
  std::string labels_path;
  std::string out_prefix;
  std::uint64_t seed = 0;
  int classes = 0;
  double lambda = -1.0;  // < 0 draws uniformly
  std::vector<int> region;
  int region_size = 0;  // cutout; 0 picks side / 2
  double fill = 0.0;
};

int run_baseline(const BaselineArgs &args) {
  const ImageBatch images = load_images(args.images_path);
  const LabelBatch labels = load_labels(args.labels_path, args.classes);
  const SoftLabelBatch one_hot = SoftLabelBatch::one_hot(labels);
  const int height = images.height();
  const int width = images.width();

  Rng rng(args.seed);

  if (args.method == "cutout") {
    RectRegion region;
    if (!args.region.empty()) {
      region = {args.region[0], args.region[1], args.region[2], args.region[3]};
    } else {
      int size = args.region_size > 0 ? args.region_size : height / 2;
      size = std::min({size, height, width});
      region.height = region.width = size;
      region.top = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(height - size) + 1));
      region.left = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(width - size) + 1));
    }
    const ImageBatch out = cutout(images, region, static_cast<float>(args.fill));
    write_tbf(args.out_prefix + "_images.tbf", out);
    write_tbf(args.out_prefix + "_softlabels.tbf", one_hot);
    std::printf("cutout region=(%d,%d,%d,%d) fill=%g\n", region.top, region.left,
                region.height, region.width, args.fill);
    return 0;
  }

  // Mixing methods pair each sample with a permuted partner.
  const auto partner = detail::draw_permutation(images.batch(), rng);
  const ImageBatch partner_images = gather_samples(images, partner);
  const SoftLabelBatch partner_labels = one_hot.gather_rows(partner);

  if (args.method == "mixup") {
    const double lambda = args.lambda >= 0.0 ? args.lambda : rng.next_double();
    const MixedBatch out = mixup(images, partner_images, one_hot, partner_labels, lambda);
    write_tbf(args.out_prefix + "_images.tbf", out.images);
    write_tbf(args.out_prefix + "_softlabels.tbf", out.labels);
    std::printf("mixup lambda=%.9g\n", lambda);
    return 0;
  }
  if (args.method == "cutmix") {
    RectRegion region;
    if (!args.region.empty()) {
      region = {args.region[0], args.region[1], args.region[2], args.region[3]};
    } else {
      region.height = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(height)));
      region.width = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(width)));
      region.top =
          static_cast<int>(rng.bounded(static_cast<std::uint64_t>(height - region.height) + 1));
      region.left =
          static_cast<int>(rng.bounded(static_cast<std::uint64_t>(width - region.width) + 1));
    }
    const MixedBatch out = cutmix(images, partner_images, one_hot, partner_labels, region);
    write_tbf(args.out_prefix + "_images.tbf", out.images);
    write_tbf(args.out_prefix + "_softlabels.tbf", out.labels);
    std::printf("cutmix region=(%d,%d,%d,%d) lambda=%.9g\n", region.top, region.left,
                region.height, region.width,
                1.0 - static_cast<double>(region.area()) / (static_cast<double>(height) * width));
    return 0;
  }
  throw DomainError("baseline: unknown method '" + args.method + "'");
}

struct TraceArgs {
  std::string config_path;
  std::string losses_path;
  long steps = 0;
  double initial_loss = 8.0;
  double tau = 10.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::string> policy;
  std::optional<double> threshold;
  std::optional<double> ema;
  std::string out_path;
};

int run_trace(const TraceArgs &args) {
  RunConfig config = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  if (args.policy) config.policy = *args.policy;
  if (args.threshold) config.threshold = *args.threshold;
  if (args.ema) config.loss_ema = *args.ema;
  config.validate();

  std::vector<double> losses;
  if (!args.losses_path.empty()) {
    std::ifstream in(args.losses_path);
    if (!in) {
      throw FormatError("cannot open loss trace '" + args.losses_path + "'");
    }
    losses = parse_loss_trace(in).losses;
  } else {
    if (args.steps < 1) {
      throw DomainError("trace: need --losses or --steps >= 1");
    }
    const SyntheticLearner learner(args.initial_loss, args.tau, args.sigma);
    Rng rng(args.seed);
    losses.reserve(static_cast<std::size_t>(args.steps));
    for (long t = 0; t < args.steps; ++t) {
      losses.push_back(learner.loss_at(t, rng));
    }
  }

  const RunReport report =
      run_controller(LossTrace(std::move(losses)), config.make_state(Rng::derive(args.seed, 1)));
  write_text(args.out_path, report.to_csv());
  std::printf("wrote %s (%ld steps, policy=%s)\n", args.out_path.c_str(), report.steps(),
              report.policy.c_str());
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  long steps = 50;
  double initial_loss = 8.0;
  double tau = 10.0;
  double sigma = 0.0;
  int channels = 3;
  int classes = 2;
  std::uint64_t seed = 0;
  std::string out_prefix;
};

int run_simulate(const SimulateArgs &args) {
  const RunConfig config =
      args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  config.validate();
  const SyntheticLearner learner(args.initial_loss, args.tau, args.sigma);
  const SimBatchConfig batch_config{config.batch_size, args.channels, config.image_side,
                                    args.classes,      config.trigger_prob,
                                    config.shuffle_mode()};
  const RunReport report =
      simulate_training(learner, config.make_state(Rng::derive(args.seed, 1)), args.steps,
                        batch_config, args.seed);
  write_text(args.out_prefix + "_trace.csv", report.to_csv());
  write_text(args.out_prefix + "_summary.json", report.summary_json());
  std::printf("wrote %s_trace.csv and %s_summary.json (%ld steps, %ld triggered)\n",
              args.out_prefix.c_str(), args.out_prefix.c_str(), report.steps(),
              report.triggered_steps());
  return 0;
}

struct CorruptArgs {
  std::string labels_path;
  double ratio = 0.0;
  int classes = 0;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_corrupt(const CorruptArgs &args) {
  const LabelBatch labels = load_labels(args.labels_path, args.classes);
  Rng rng(args.seed);
  const LabelBatch corrupted = corrupt_labels(labels, args.ratio, rng);
  write_tbf(args.out_path, corrupted);
  int changed = 0;
  for (int s = 0; s < labels.batch(); ++s) {
    changed += labels.labels[s] != corrupted.labels[s] ? 1 : 0;
  }
  std::printf("resampled %d of %d labels (%d changed)\n",
              static_cast<int>(std::floor(labels.batch() * args.ratio + 0.5)), labels.batch(),
              changed);
  return 0;
}

int run_inspect(const std::vector<std::string> &paths) {
  for (const auto &path : paths) {
    const TbfFile file = read_tbf(path);
    std::string dims;
    for (std::size_t i = 0; i < file.dims.size(); ++i) {
      dims += (i ? "," : "") + std::to_string(file.dims[i]);
    }
    std::printf("%s: kind=%s dims=[%s] elements=%" PRIu64 "\n", path.c_str(),
                to_string(file.kind).c_str(), dims.c_str(), file.element_count());
    if (file.is_float()) {
      double lo = 0.0, hi = 0.0, sum = 0.0;
      bool first = true;
      bool finite = true;
      for (float v : file.f32) {
        finite = finite && std::isfinite(v);
        if (first) {
          lo = hi = v;
          first = false;
        }
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
        sum += v;
      }
      std::printf("  min=%.6g max=%.6g mean=%.6g finite=%s\n", lo, hi,
                  sum / static_cast<double>(file.f32.size()), finite ? "yes" : "no");
    } else {
      std::uint32_t lo = ~0u, hi = 0;
      for (auto v : file.u32) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      std::printf("  min=%u max=%u\n", lo, hi);
    }
  }
  return 0;
}

int run_png_import(const std::vector<std::string> &paths, const std::string &out_path) {
  std::vector<ImageBatch> singles;
  singles.reserve(paths.size());
  for (const auto &path : paths) {
    singles.push_back(read_png(path));
    if (!singles.front().same_shape(singles.back())) {
      throw DomainError("png-import: '" + path + "' shape differs from the first image");
    }
  }
  ImageBatch out(static_cast<int>(singles.size()), singles.front().channels(),
                 singles.front().height(), singles.front().width());
  const std::size_t per_sample = singles.front().size();
  for (std::size_t s = 0; s < singles.size(); ++s) {
    std::copy(singles[s].data().begin(), singles[s].data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(per_sample * s));
  }
  write_tbf(out_path, out);
  std::printf("wrote %s (%zu samples)\n", out_path.c_str(), singles.size());
  return 0;
}

int run_png_export(const std::string &images_path, const std::string &out_prefix) {
  const ImageBatch images = load_images(images_path);
  for (int s = 0; s < images.batch(); ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "_%03d.png", s);
    write_png(out_prefix + name, images, s);
  }
  std::printf("wrote %d PNG file(s) under %s_*.png\n", images.batch(), out_prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"cellmix: batched patch-shuffle augmentation toolbox"};
  app.require_subcommand(1);

  GenArgs gen;
  auto *gen_cmd = app.add_subcommand("gen", "generate a reproducible synthetic batch");
  gen_cmd->add_option("-B,--batch", gen.batch, "batch size")->capture_default_str();
  gen_cmd->add_option("-C,--channels", gen.channels, "channels")->capture_default_str();
  gen_cmd->add_option("--side", gen.side, "image side (multiple of 16)")->capture_default_str();
  gen_cmd->add_option("--classes", gen.classes, "number of classes")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "rng seed")->required();
  gen_cmd->add_option("-o,--out", gen.out_prefix, "output prefix")->required();

  AugmentArgs aug;
  auto *aug_cmd = app.add_subcommand("augment", "in-place shuffle a batch");
  aug_cmd->add_option("--config", aug.config_path, "JSON run config");
  aug_cmd->add_option("--images", aug.images_path, "input images TBF")->required();
  aug_cmd->add_option("--labels", aug.labels_path, "input labels TBF")->required();
  aug_cmd->add_option("--classes", aug.classes, "class count (0 = infer max+1)")
      ->capture_default_str();
  aug_cmd->add_option("--beta", aug.beta, "fix-position ratio (default: first schedule entry)");
  aug_cmd->add_option("--patch-size", aug.patch_size,
                      "patch size (default: first schedule entry)");
  aug_cmd->add_option("--trigger", aug.trigger, "trigger probability (default from config)");
  aug_cmd->add_option("--mode", aug.mode, "group | split (default from config)");
  aug_cmd->add_option("--seed", aug.seed, "rng seed")->required();
  aug_cmd->add_option("-o,--out", aug.out_prefix, "output prefix")->required();

  BaselineArgs base;
  auto *base_cmd = app.add_subcommand("baseline", "run a reference augmentation");
  base_cmd->add_option("--method", base.method, "mixup | cutout | cutmix")->required();
  base_cmd->add_option("--images", base.images_path, "input images TBF")->required();
  base_cmd->add_option("--labels", base.labels_path, "input labels TBF")->required();
  base_cmd->add_option("--classes", base.classes, "class count (0 = infer max+1)")
      ->capture_default_str();
  base_cmd->add_option("--lambda", base.lambda, "mixup weight (negative draws uniformly)")
      ->capture_default_str();
  base_cmd->add_option("--region", base.region, "top,left,height,width")->expected(4);
  base_cmd->add_option("--region-size", base.region_size,
                       "cutout square side (0 = half the image side)")
      ->capture_default_str();
  base_cmd->add_option("--fill", base.fill, "cutout fill value")->capture_default_str();
  base_cmd->add_option("--seed", base.seed, "rng seed")->capture_default_str();
  base_cmd->add_option("-o,--out", base.out_prefix, "output prefix")->required();

  TraceArgs trace;
  auto *trace_cmd = app.add_subcommand("trace", "replay losses through the controller");
  trace_cmd->add_option("--config", trace.config_path, "JSON run config");
  trace_cmd->add_option("--losses", trace.losses_path, "loss CSV, one value per line");
  trace_cmd->add_option("--steps", trace.steps, "synthetic learner steps");
  trace_cmd->add_option("--initial-loss", trace.initial_loss, "synthetic initial loss")
      ->capture_default_str();
  trace_cmd->add_option("--tau", trace.tau, "synthetic decay constant")->capture_default_str();
  trace_cmd->add_option("--sigma", trace.sigma, "synthetic noise scale")->capture_default_str();
  trace_cmd->add_option("--policy", trace.policy, "override config policy");
  trace_cmd->add_option("--threshold", trace.threshold, "override loss threshold");
  trace_cmd->add_option("--ema", trace.ema, "loss EMA coefficient in [0, 1)");
  trace_cmd->add_option("--seed", trace.seed, "rng seed (noise + random policy)")
      ->capture_default_str();
  trace_cmd->add_option("-o,--out", trace.out_path, "output CSV path")->required();

  SimulateArgs sim;
  auto *sim_cmd = app.add_subcommand("simulate", "synthetic learner + full pipeline per step");
  sim_cmd->add_option("--config", sim.config_path, "JSON run config");
  sim_cmd->add_option("--steps", sim.steps, "steps to run")->capture_default_str();
  sim_cmd->add_option("--initial-loss", sim.initial_loss, "initial loss")->capture_default_str();
  sim_cmd->add_option("--tau", sim.tau, "decay constant")->capture_default_str();
  sim_cmd->add_option("--sigma", sim.sigma, "noise scale")->capture_default_str();
  sim_cmd->add_option("--channels", sim.channels, "generated batch channels")
      ->capture_default_str();
  sim_cmd->add_option("--classes", sim.classes, "generated batch classes")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "rng seed")->required();
  sim_cmd->add_option("-o,--out", sim.out_prefix, "output prefix")->required();

  CorruptArgs corrupt;
  auto *corrupt_cmd = app.add_subcommand("corrupt", "resample a share of labels");
  corrupt_cmd->add_option("--labels", corrupt.labels_path, "input labels TBF")->required();
  corrupt_cmd->add_option("--ratio", corrupt.ratio, "share of samples to resample")->required();
  corrupt_cmd->add_option("--classes", corrupt.classes, "class count (0 = infer max+1)")
      ->capture_default_str();
  corrupt_cmd->add_option("--seed", corrupt.seed, "rng seed")->capture_default_str();
  corrupt_cmd->add_option("-o,--out", corrupt.out_path, "output labels TBF")->required();

  std::vector<std::string> inspect_paths;
  auto *inspect_cmd = app.add_subcommand("inspect", "print TBF headers and stats");
  inspect_cmd->add_option("paths", inspect_paths, "TBF files")->required();

  std::vector<std::string> import_paths;
  std::string import_out;
  auto *import_cmd = app.add_subcommand("png-import", "stack PNGs into an images TBF");
  import_cmd->add_option("paths", import_paths, "PNG files, equal dims")->required();
  import_cmd->add_option("-o,--out", import_out, "output images TBF")->required();

  std::string export_images, export_prefix;
  auto *export_cmd = app.add_subcommand("png-export", "write each sample as a PNG");
  export_cmd->add_option("--images", export_images, "input images TBF")->required();
  export_cmd->add_option("-o,--out", export_prefix, "output prefix")->required();

  try {
    app.parse(argc, argv);
    if (gen_cmd->parsed()) return run_gen(gen);
    if (aug_cmd->parsed()) return run_augment(aug);
    if (base_cmd->parsed()) return run_baseline(base);
    if (trace_cmd->parsed()) return run_trace(trace);
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (corrupt_cmd->parsed()) return run_corrupt(corrupt);
    if (inspect_cmd->parsed()) return run_inspect(inspect_paths);
    if (import_cmd->parsed()) return run_png_import(import_paths, import_out);
    if (export_cmd->parsed()) return run_png_export(export_images, export_prefix);
    return 2;
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  } catch (const cellmix::FormatError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const cellmix::DomainError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
