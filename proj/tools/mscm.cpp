// Command-line front end: extract descriptors from a dataset tree, run the
// two-way matching evaluation, sweep the shape/appearance weight, run the
// class-count scaling study, and generate synthetic datasets.

#include "mscm/dataset.hpp"
#include "mscm/error.hpp"
#include "mscm/testkit.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace mscm;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::io_error:
    case Errc::bad_image:
    case Errc::unsupported_channels:
    case Errc::no_records_found:
      return 2;
    case Errc::dimension_mismatch:
    case Errc::empty_model_set:
    case Errc::missing_part:
    case Errc::unpaired_cultivar:
    case Errc::not_enough_classes:
      return 3;
    default:
      return 4;
  }
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

struct CommonConfig {
  int nc = 512;
  int scales = 7;
  int coeffs = 7;
};

void add_common_flags(CLI::App* cmd, CommonConfig& cfg) {
  cmd->add_option("--nc", cfg.nc, "contour samples (power of two)")->capture_default_str();
  cmd->add_option("--scales", cfg.scales, "number of dyadic scales K")->capture_default_str();
  cmd->add_option("--coeffs", cfg.coeffs, "Fourier coefficients per signature C")
      ->capture_default_str();
}

int cmd_extract(const std::string& root, const std::string& out, const CommonConfig& common,
                bool strict, bool per_part_stats, bool no_cache, unsigned threads,
                bool export_masks) {
  const Manifest manifest = scan_directory(root);
  for (const std::string& name : manifest.unmatched)
    std::cerr << "warning: ignoring " << name << "\n";

  ExtractConfig cfg;
  cfg.nc = common.nc;
  cfg.scale_count = common.scales;
  cfg.coeff_count = common.coeffs;
  cfg.strict = strict;
  cfg.stats_per_part = per_part_stats;
  cfg.threads = threads;
  if (!no_cache) cfg.cache_dir = std::filesystem::path(out) / "cache";

  std::filesystem::create_directories(out);
  const DescriptorStore store = extract_all(manifest, cfg);
  save_store(store, out);
  save_manifest_csv(std::filesystem::path(out) / "manifest.csv", manifest);
  for (const SkipEntry& skip : store.skipped)
    std::cerr << "skipped " << skip.record.id() << " " << skip.record.part << ": " << skip.reason
              << "\n";

  if (export_masks) {
    const std::filesystem::path mask_dir = std::filesystem::path(out) / "masks";
    std::filesystem::create_directories(mask_dir);
    for (const StoreEntry& e : store.entries) {
      const MaskArray mask = segment(to_gray(load_image(e.record.image_path)));
      save_pgm(mask_dir / (e.record.cultivar_id + "_" + std::string(1, e.record.part) + "_" +
                           std::to_string(e.record.sample_index) + ".pgm"),
               mask_to_raster(mask));
    }
  }

  std::cout << "records=" << manifest.records.size() << " descriptors=" << store.entries.size()
            << " skipped=" << store.skipped.size() << " out=" << out << "\n";
  return store.entries.empty() ? 2 : 0;
}

int cmd_evaluate(const std::string& store_dir, const std::string& out, double w, bool pgm) {
  const DescriptorStore store = load_store(store_dir);
  const std::vector<JointDescriptor> joints = assemble_joints(store);
  const EvalReport report = evaluate(joints, EvalOptions{w, std::nullopt});

  std::filesystem::create_directories(out);
  save_report_json(std::filesystem::path(out) / "report.json", report, w);
  save_confusion_csv(std::filesystem::path(out) / "confusion.csv", report);
  if (pgm) save_confusion_pgm(std::filesystem::path(out) / "confusion.pgm", report);

  std::cout << "n_tests=" << report.n_tests << " n_correct=" << report.n_correct
            << " accuracy=" << fixed4(report.accuracy)
            << " upper=" << fixed4(report.per_part_accuracy[0])
            << " middle=" << fixed4(report.per_part_accuracy[1])
            << " lower=" << fixed4(report.per_part_accuracy[2]) << "\n";
  return 0;
}

int cmd_sweep(const std::string& store_dir, const std::string& out, int steps) {
  const DescriptorStore store = load_store(store_dir);
  const auto rows = sweep_w(assemble_joints(store), steps);

  std::string csv = "w,accuracy\n";
  for (const auto& [w, acc] : rows) csv += format_double(w) + "," + format_double(acc) + "\n";
  write_file_atomic(out, csv);
  std::cout << "rows=" << rows.size() << " out=" << out << "\n";
  return 0;
}

int cmd_scaling(const std::string& store_dir, const std::string& out, int start, int stop,
                int step, double w) {
  const DescriptorStore store = load_store(store_dir);
  const auto rows = scaling_study(assemble_joints(store), start, stop, step, w);

  std::string csv = "n_classes,accuracy\n";
  for (const auto& [n, acc] : rows) csv += std::to_string(n) + "," + format_double(acc) + "\n";
  write_file_atomic(out, csv);
  std::cout << "rows=" << rows.size() << " out=" << out << "\n";
  return 0;
}

int cmd_synth(const std::string& out, int classes, std::uint64_t seed) {
  if (classes < 2) {
    std::cerr << "synth needs --classes >= 2\n";
    return 2;
  }
  testkit::make_mini_dataset(out, classes, seed);
  std::cout << "classes=" << classes << " images=" << classes * 6 << " out=" << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiscale sliding chord descriptors for leaf images"};
  app.require_subcommand(1);

  CommonConfig common;

  // extract
  auto* extract = app.add_subcommand("extract", "extract descriptors from a dataset tree");
  std::string extract_root, extract_out;
  bool strict = true, per_part_stats = false, no_cache = false, export_masks = false;
  unsigned threads = 0;
  extract->add_option("root", extract_root, "dataset root directory")->required();
  extract->add_option("--out", extract_out, "output store directory")->required();
  add_common_flags(extract, common);
  extract->add_flag("--strict,!--no-strict", strict, "require 2 samples x 3 parts per cultivar");
  extract->add_flag("--per-part-stats", per_part_stats,
                    "train normalization statistics per part instead of pooled");
  extract->add_flag("--no-cache", no_cache, "disable the raw-coefficient cache");
  extract->add_option("--threads", threads, "worker threads (0 = auto)");
  extract->add_flag("--export-masks", export_masks, "write segmentation masks as PGM");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "two-way matching evaluation over a store");
  std::string eval_store, eval_out = "eval";
  double weight = 0.29;
  bool pgm = false;
  evaluate_cmd->add_option("store", eval_store, "descriptor store directory")->required();
  evaluate_cmd->add_option("--out", eval_out, "report output directory")->capture_default_str();
  evaluate_cmd->add_option("--weight", weight, "shape/appearance weight W")->capture_default_str();
  evaluate_cmd->add_flag("--pgm", pgm, "also render the confusion matrix as PGM");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "accuracy vs. weight W");
  std::string sweep_store, sweep_out = "sweep.csv";
  int steps = 101;
  sweep_cmd->add_option("store", sweep_store, "descriptor store directory")->required();
  sweep_cmd->add_option("--steps", steps, "number of W grid points")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "output CSV path")->capture_default_str();

  // scaling
  auto* scaling_cmd = app.add_subcommand("scaling", "accuracy vs. class count");
  std::string scaling_store, scaling_out = "scaling.csv";
  int start = 100, stop = 200, step = 10;
  scaling_cmd->add_option("store", scaling_store, "descriptor store directory")->required();
  scaling_cmd->add_option("--start", start, "first class count")->capture_default_str();
  scaling_cmd->add_option("--stop", stop, "last class count")->capture_default_str();
  scaling_cmd->add_option("--step", step, "class count step")->capture_default_str();
  scaling_cmd->add_option("--weight", weight, "shape/appearance weight W")->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset tree");
  std::string synth_out;
  int classes = 10;
  std::uint64_t seed = 7;
  synth_cmd->add_option("--classes", classes, "number of classes")->capture_default_str();
  synth_cmd->add_option("--seed", seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "output dataset directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract)
      return cmd_extract(extract_root, extract_out, common, strict, per_part_stats, no_cache,
                         threads, export_masks);
    if (*evaluate_cmd) return cmd_evaluate(eval_store, eval_out, weight, pgm);
    if (*sweep_cmd) return cmd_sweep(sweep_store, sweep_out, steps);
    if (*scaling_cmd) return cmd_scaling(scaling_store, scaling_out, start, stop, step, weight);
    if (*synth_cmd) return cmd_synth(synth_out, classes, seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
