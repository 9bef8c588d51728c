// Command-line front end for the experiment pipeline:
//   prepare            decode/resample/augment the dataset and write caches
//   train-mst          train the mel-transform network for one fold
//   train-clf          train one classifier variant for one fold
//   evaluate           score a trained variant on its test folds
//   report             aggregate saved evaluations into JSON/CSV
//   dump-filters       export first-layer MST kernels as CSV
//   dump-spectrogram   target-vs-predicted mel comparison for a clip
//   gradcheck          finite-difference verification of the full stacks
//
// Exit codes: 0 success, 2 usage error, 3 missing prerequisite artifact.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "mstnet/exp/experiment.hpp"
#include "mstnet/nn/gradcheck.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMissingArtifact = 3;

int run_gradcheck() {
  using namespace mstnet;
  double worst = 0.0;

  {
    auto m = model::build_mst<double>(1);
    nn::Tensor<double> x({1, 1, 2048});
    nn::Rng rng(7);
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-1.0, 1.0);
    nn::Tensor<double> target({1, 60, 4});
    for (std::size_t i = 0; i < target.numel(); ++i) target[i] = rng.uniform(-0.9, 0.9);
    const double err = nn::gradient_check<double>(
        m, x, [&](const nn::Tensor<double>& y) { return nn::mse_loss(y, target); }, 50,
        1e-6, 1, 1e-7);
    std::cout << "mst stack max relative error: " << err << "\n";
    worst = std::max(worst, err);
  }
  {
    auto m = model::build_classifier<double>(model::InitVariant::RAW_XAVIER, 2);
    nn::Tensor<double> x({1, 1, 51712});
    nn::Rng rng(8);
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-1.0, 1.0);
    const std::vector<int> label = {3};
    const double err = nn::gradient_check<double>(
        m, x,
        [&](const nn::Tensor<double>& y) { return nn::cross_entropy_loss(y, label); }, 20,
        1e-7, 2, 1e-7);
    std::cout << "classifier stack max relative error: " << err << "\n";
    worst = std::max(worst, err);
  }
  std::cout << (worst < 1e-4 ? "gradcheck OK" : "gradcheck FAILED") << "\n";
  return worst < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mstnet;

  CLI::App app{"mel-spectrogram transform training and evaluation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "path to the experiment config file")
      ->required();
  std::uint64_t seed_override = 0;
  auto* seed_opt = app.add_option("--seed", seed_override, "override the run seed");
  std::vector<int> folds_override;
  auto* folds_opt =
      app.add_option("--folds", folds_override, "override the fold list")->delimiter(',');
  bool smoke = false;
  app.add_flag("--smoke", smoke, "tiny synthetic preset for end-to-end checks");

  auto* cmd_prepare = app.add_subcommand("prepare", "decode, resample, augment, cache");
  auto* cmd_train_mst = app.add_subcommand("train-mst", "train the MST network");
  auto* cmd_train_clf = app.add_subcommand("train-clf", "train a classifier variant");
  auto* cmd_evaluate = app.add_subcommand("evaluate", "score a trained variant");
  auto* cmd_report = app.add_subcommand("report", "aggregate evaluations");
  auto* cmd_dump_filters = app.add_subcommand("dump-filters", "export MST kernels");
  auto* cmd_dump_spec =
      app.add_subcommand("dump-spectrogram", "target-vs-prediction comparison");
  auto* cmd_gradcheck = app.add_subcommand("gradcheck", "finite-difference verification");

  int fold_arg = 0;
  cmd_train_mst->add_option("--fold", fold_arg, "test fold (1..5)")->required();
  int clf_fold = 0;
  std::string variant_arg;
  cmd_train_clf->add_option("--fold", clf_fold, "test fold (1..5)")->required();
  cmd_train_clf->add_option("--variant", variant_arg, "classifier variant")->required();
  std::string eval_variant;
  cmd_evaluate->add_option("--variant", eval_variant, "classifier variant")->required();
  int filters_fold = 0;
  cmd_dump_filters->add_option("--fold", filters_fold, "test fold (1..5)")->required();
  std::string clip_id;
  int spec_fold = 0;
  cmd_dump_spec->add_option("--clip", clip_id, "clip id")->required();
  cmd_dump_spec->add_option("--fold", spec_fold,
                            "fold whose MST checkpoint to use (defaults to the clip's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    auto cfg = exp::load_config(config_path);
    if (*seed_opt) cfg.seed = seed_override;
    if (*folds_opt) cfg.folds = folds_override;
    if (smoke) exp::apply_smoke_preset(cfg);
    for (int f : cfg.folds) exp::validate_fold(f);

    if (*cmd_gradcheck) return run_gradcheck();

    if (*cmd_prepare) {
      if (cfg.smoke && cfg.dataset_path.empty()) {
        const auto dir = exp::art_root(cfg) / "smoke_data";
        exp::generate_smoke_dataset(dir, cfg.smoke_classes, cfg.smoke_clips_per_class,
                                    cfg.seed, cfg.sample_rate, cfg.clip_seconds);
        cfg.dataset_path = dir.string();
      }
      const auto manifest = exp::prepare_dataset(cfg);
      std::cout << "prepared " << manifest.size() << " clip variants under "
                << cfg.artifacts_dir << "\n";
      return 0;
    }

    if (*cmd_train_mst) {
      exp::validate_fold(fold_arg);
      const auto manifest = exp::require_manifest(cfg);
      const auto res = exp::train_mst_for_fold(cfg, manifest, fold_arg);
      std::cout << "fold " << fold_arg << ": best validation mse " << res.best_val_mse
                << " at epoch " << res.best_epoch << "\n";
      return 0;
    }

    if (*cmd_train_clf) {
      exp::validate_fold(clf_fold);
      const auto variant = model::parse_variant(variant_arg);
      const auto manifest = exp::require_manifest(cfg);
      const auto res = exp::train_clf_for_fold(cfg, manifest, variant, clf_fold);
      std::cout << variant_arg << " fold " << clf_fold << ": final train acc "
                << res.curve.back().train_acc << ", best val acc " << res.best_val_acc
                << "\n";
      return 0;
    }

    if (*cmd_evaluate) {
      const auto variant = model::parse_variant(eval_variant);
      const auto manifest = exp::require_manifest(cfg);
      for (int f : cfg.folds) {
        const auto r = exp::evaluate_fold(cfg, manifest, variant, f);
        std::cout << eval_variant << " fold " << f << ": majority "
                  << r.majority_accuracy << ", probability " << r.probability_accuracy
                  << "\n";
      }
      return 0;
    }

    if (*cmd_report) {
      exp::EvaluationReport report;
      report.config = cfg;
      for (const auto& vname : cfg.variants) {
        exp::VariantResult vr{vname, {}};
        for (int f : cfg.folds) vr.folds.push_back(exp::load_fold_result(cfg, vname, f));
        report.variants.push_back(std::move(vr));
      }
      exp::write_report(report, exp::art_root(cfg));
      for (const auto& v : report.variants)
        std::cout << v.variant << ": mean majority " << v.mean(true)
                  << ", mean probability " << v.mean(false) << "\n";
      return 0;
    }

    if (*cmd_dump_filters) {
      exp::validate_fold(filters_fold);
      exp::dump_filters_for_fold(cfg, filters_fold);
      std::cout << "wrote filters_fold" << filters_fold << ".csv\n";
      return 0;
    }

    if (*cmd_dump_spec) {
      const auto manifest = exp::require_manifest(cfg);
      int fold = spec_fold;
      if (fold == 0) {
        for (const auto& m : manifest)
          if (m.clip_id == clip_id && m.variant.empty()) fold = m.fold;
        if (fold == 0) throw std::invalid_argument("clip not found: " + clip_id);
      }
      const double mse =
          exp::emit_comparison_figure(cfg, manifest, fold, clip_id);
      std::cout << "comparison mse " << mse << "\n";
      return 0;
    }
  } catch (const exp::MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingArtifact;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
