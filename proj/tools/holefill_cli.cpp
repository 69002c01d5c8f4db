// Command-line front end: dataset synthesis, training, single-hole
// filling, whole-dataset evaluation and mesh export.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "holefill/data/generator.hpp"
#include "holefill/geom/surface_io.hpp"
#include "holefill/net/checkpoint.hpp"
#include "holefill/net/train.hpp"
#include "holefill/pipeline/run.hpp"

namespace hf = holefill;

namespace {

hf::pipeline::RunConfig make_config(const std::string& config_path, const std::string& method,
                                    const std::string& checkpoint, std::uint64_t seed) {
  hf::pipeline::RunConfig cfg;
  if (!config_path.empty()) cfg = hf::pipeline::load_run_config(config_path);
  if (!method.empty()) cfg.method = hf::pipeline::method_from_string(method);
  if (!checkpoint.empty()) cfg.checkpoint_path = checkpoint;
  if (seed != 0) cfg.seed = seed;
  return cfg;
}

std::unique_ptr<hf::net::Model> maybe_load_model(const hf::pipeline::RunConfig& cfg) {
  if (cfg.method != hf::pipeline::Method::kNet) return nullptr;
  if (cfg.checkpoint_path.empty())
    throw std::runtime_error("method 'net' requires --checkpoint");
  return std::make_unique<hf::net::Model>(hf::net::load_checkpoint(cfg.checkpoint_path));
}

int exit_code_for(const hf::pipeline::FillReport& report) {
  for (const auto& r : report.rows)
    if (r.failed) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trimmed B-spline hole filling"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  int synth_surfaces = 50, synth_per_surface = 4, synth_samples = 128;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "dataset.ndjson";
  bool synth_hard = false;
  synth->add_option("--count", synth_surfaces, "Number of base surfaces");
  synth->add_option("--per-surface", synth_per_surface, "Trimming loops per surface");
  synth->add_option("--seed", synth_seed, "Corpus seed");
  synth->add_option("--samples", synth_samples, "Boundary samples per record");
  synth->add_option("--out", synth_out, "Output NDJSON path")->required();
  synth->add_flag("--hard", synth_hard, "Folded high-curvature family only");

  // train
  auto* train = app.add_subcommand("train", "Train the two-stage predictor");
  std::string train_dataset, train_out = "checkpoint.json", train_config;
  int train_d = 64, train_l = 2, train_heads = 4;
  int train_epochs_low = 400, train_epochs_high = 300;
  double train_lr = 3e-3;
  std::uint64_t train_seed = 1;
  bool train_single_stage = false;
  int train_bins_low = 10, train_refine = 10;
  bool train_verbose = false;
  train->add_option("--dataset", train_dataset, "Training NDJSON")->required();
  train->add_option("--out", train_out, "Checkpoint output path");
  train->add_option("--config", train_config, "Run-config file (seed echo only)");
  train->add_option("--width", train_d, "Feature width");
  train->add_option("--depth", train_l, "Encoder depth");
  train->add_option("--heads", train_heads, "Attention heads");
  train->add_option("--epochs-low", train_epochs_low, "First-stage epochs");
  train->add_option("--epochs-high", train_epochs_high, "Second-stage epochs");
  train->add_option("--lr", train_lr, "Learning rate");
  train->add_option("--seed", train_seed, "Init/dropout seed");
  train->add_option("--bins-low", train_bins_low, "First-stage classes per axis");
  train->add_option("--refine", train_refine, "Sub-bins per coarse bin");
  train->add_flag("--single-stage", train_single_stage, "Disable the refinement stage");
  train->add_flag("--verbose", train_verbose, "Per-epoch progress on stderr");

  // fill
  auto* fill = app.add_subcommand("fill", "Fill one hole boundary");
  std::string fill_method = "np", fill_boundary, fill_checkpoint, fill_out = "fill_out",
              fill_config;
  std::uint64_t fill_seed = 0;
  fill->add_option("--method", fill_method, "net|np|mvc");
  fill->add_option("--boundary", fill_boundary, "Boundary JSON")->required();
  fill->add_option("--checkpoint", fill_checkpoint, "Model checkpoint (net method)");
  fill->add_option("--config", fill_config, "Run-config file");
  fill->add_option("--out", fill_out, "Output directory");
  fill->add_option("--seed", fill_seed, "Seed override");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a method over a dataset");
  std::string eval_method = "np", eval_dataset, eval_report = "report.csv", eval_checkpoint,
              eval_config, eval_split = "test";
  std::uint64_t eval_seed = 0;
  bool eval_curvature_maps = false;
  eval->add_option("--method", eval_method, "net|np|mvc|gt-projection");
  eval->add_option("--dataset", eval_dataset, "Dataset NDJSON")->required();
  eval->add_option("--report", eval_report, "Report CSV path");
  eval->add_option("--checkpoint", eval_checkpoint, "Model checkpoint (net method)");
  eval->add_option("--config", eval_config, "Run-config file");
  eval->add_option("--split", eval_split, "test|train|all");
  eval->add_option("--seed", eval_seed, "Seed override");
  eval->add_flag("--curvature-maps", eval_curvature_maps,
                 "Export per-case curvature samples next to the report");

  // export
  auto* exp = app.add_subcommand("export", "Tessellate a surface to OBJ");
  std::string exp_surface, exp_pcurve, exp_out = "surface.obj";
  int exp_res = 64;
  exp->add_option("--surface", exp_surface, "Surface JSON")->required();
  exp->add_option("--pcurve", exp_pcurve, "Trimming curve JSON");
  exp->add_option("--res", exp_res, "Sampling grid resolution");
  exp->add_option("--out", exp_out, "Output OBJ path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      hf::data::CorpusOptions options;
      options.surfaces = synth_surfaces;
      options.pcurves_per_surface = synth_per_surface;
      options.seed = synth_seed;
      options.hard_only = synth_hard;
      options.boundary_samples = synth_samples;
      const auto records = hf::data::build_corpus(options);
      hf::data::DatasetManifest manifest;
      manifest.corpus_seed = synth_seed;
      manifest.count = static_cast<int>(records.size());
      hf::data::save_dataset(records, manifest, synth_out);
      std::cout << "wrote " << records.size() << " records to " << synth_out << "\n";
      return 0;
    }

    if (*train) {
      const auto records = hf::data::load_dataset(train_dataset);
      if (records.empty()) throw std::runtime_error("empty dataset");
      hf::net::NetConfig cfg;
      cfg.n = records.front().boundary.size();
      cfg.d = train_d;
      cfg.l = train_l;
      cfg.heads = train_heads;
      cfg.seed = train_seed;
      cfg.bins_low = train_bins_low;
      cfg.refine = train_refine;
      cfg.single_stage = train_single_stage;
      hf::net::Model model(cfg);
      std::vector<hf::net::TrainingSample> samples;
      samples.reserve(records.size());
      for (const auto& r : records) samples.push_back(hf::net::sample_from_record(r));
      hf::net::TrainOptions options;
      options.epochs_low = train_epochs_low;
      options.epochs_high = train_epochs_high;
      options.lr_low = options.lr_high = train_lr;
      options.verbose = train_verbose;
      const auto result = hf::net::train(model, samples, options);
      hf::net::save_checkpoint(model, train_out);
      hf::net::save_trace_csv(result.trace, train_out + ".trace.csv");
      std::cout << "stage1 top1 " << result.low_top1 << " after " << result.low_epochs_run
                << " epochs";
      if (!cfg.single_stage)
        std::cout << ", stage2 top1 " << result.high_top1 << " after "
                  << result.high_epochs_run << " epochs";
      std::cout << "\nwrote " << train_out << "\n";
      return 0;
    }

    if (*fill) {
      auto cfg = make_config(fill_config, fill_method, fill_checkpoint, fill_seed);
      const auto boundary = hf::param::load_boundary(fill_boundary);
      auto model = maybe_load_model(cfg);
      std::filesystem::create_directories(fill_out);
      const auto result = hf::pipeline::run_fill_raw(cfg, boundary, model.get(), "fill");
      hf::pipeline::FillReport report;
      report.rows.push_back(result.row);
      hf::pipeline::save_report_csv(report, fill_out + "/report.csv");
      if (result.has_surface) {
        hf::geom::save_surface(result.filled, fill_out + "/filled_surface.json");
        hf::param::save_pcurve(result.pcurve, fill_out + "/pcurve.json");
      }
      std::cout << hf::pipeline::report_summary(report);
      if (result.row.failed) {
        std::cerr << "fill failed: " << result.row.error << "\n";
        return 2;
      }
      return 0;
    }

    if (*eval) {
      auto cfg = make_config(eval_config, eval_method, eval_checkpoint, eval_seed);
      hf::data::DatasetManifest manifest;
      auto records = hf::data::load_dataset(eval_dataset, &manifest);
      if (eval_split != "all") {
        auto [train_set, test_set] =
            hf::data::split(records, manifest.split_ratio, manifest.corpus_seed);
        records = eval_split == "train" ? std::move(train_set) : std::move(test_set);
      }
      auto model = maybe_load_model(cfg);
      const auto report = hf::pipeline::run_eval(cfg, records, model.get());
      hf::pipeline::save_report_csv(report, eval_report);
      if (eval_curvature_maps) {
        const std::string dir = eval_report + "_curvature";
        std::filesystem::create_directories(dir);
        for (size_t i = 0; i < records.size(); ++i) {
          const auto result =
              hf::pipeline::run_fill(cfg, records[i], model.get(), report.rows[i].case_id);
          if (result.has_surface)
            hf::pipeline::export_mesh(result.filled, &result.pcurve, 16,
                                      dir + "/" + report.rows[i].case_id + ".obj",
                                      dir + "/" + report.rows[i].case_id + ".csv");
        }
      }
      std::cout << report_summary(report);
      return exit_code_for(report);
    }

    if (*exp) {
      const auto surface = hf::geom::load_surface(exp_surface);
      std::optional<hf::param::PCurve> pcurve;
      if (!exp_pcurve.empty()) pcurve = hf::param::load_pcurve(exp_pcurve);
      hf::pipeline::export_mesh(surface, pcurve ? &*pcurve : nullptr, exp_res, exp_out,
                                exp_out + ".curvature.csv");
      std::cout << "wrote " << exp_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
