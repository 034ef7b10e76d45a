#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "defmag/config.hpp"
#include "defmag/dataset.hpp"
#include "defmag/dsf.hpp"
#include "defmag/error.hpp"
#include "defmag/magnify.hpp"
#include "defmag/pipeline.hpp"
#include "defmag/radial_curves.hpp"
#include "defmag/report.hpp"
#include "defmag/synth.hpp"

namespace fs = std::filesystem;
using namespace defmag;

namespace {

// Flag whose value is forwarded to a config key when given.
struct Override {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

class Overrides {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    items_.push_back(std::make_unique<Override>());
    auto& o = *items_.back();
    o.key = key;
    o.option = app->add_option(flag, o.value, help);
  }
  void apply(PipelineConfig& cfg) const {
    for (const auto& o : items_) {
      if (o->option->count() > 0) apply_config_value(cfg, o->key, o->value);
    }
  }

 private:
  std::vector<std::unique_ptr<Override>> items_;
};

void apply_band(PipelineConfig& cfg, const std::string& band) {
  const auto comma = band.find(',');
  if (comma == std::string::npos) throw UsageError("--band expects lo,hi");
  apply_config_value(cfg, "band_lo", band.substr(0, comma));
  apply_config_value(cfg, "band_hi", band.substr(comma + 1));
}

template <class F>
void in_context(const std::string& ctx, F&& f) {
  try {
    f();
  } catch (const UsageError& e) {
    throw UsageError(ctx + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(ctx + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(ctx + ": " + e.what());
  }
}

bool is_dataset_dir(const fs::path& p) { return fs::is_directory(p) && fs::exists(p / "labels.csv"); }

void log_stage(const std::string& stage, const std::string& msg) {
  std::cerr << "defmag " << stage << ": " << msg << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D facial deformation magnification and expression classification"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, output;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--output", output, "output file or directory");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic OBJ expression dataset");
  Overrides synth_o;
  synth_o.add(synth, "--subjects", "synth_subjects", "number of subjects");
  synth_o.add(synth, "--sequences", "synth_sequences", "sequences per class and subject");
  synth_o.add(synth, "--frames", "synth_frames", "frames per sequence");
  synth_o.add(synth, "--amplitude", "synth_amplitude", "global deformation scale");
  synth_o.add(synth, "--noise", "synth_noise", "per-vertex noise, mm");

  // extract
  auto* extract = app.add_subcommand("extract", "radial curves of a mesh sequence or dataset");
  std::string extract_input;
  extract->add_option("--input", extract_input, "directory of OBJ frames, or dataset with labels.csv")
      ->required();
  Overrides extract_o;
  extract_o.add(extract, "--curves", "curves", "radial curves per frame");
  extract_o.add(extract, "--samples", "samples", "points per curve");
  extract_o.add(extract, "--crop-radius", "crop_radius", "crop radius around the nose tip");
  extract_o.add(extract, "--nose", "nose", "nose tip x,y,z (default: detect on frame 0)");

  // dsf
  auto* dsf = app.add_subcommand("dsf", "dense scalar fields from curve fans");
  std::string dsf_input;
  dsf->add_option("--fans", dsf_input, ".fan file or directory with labels.csv")->required();
  Overrides dsf_o;
  dsf_o.add(dsf, "--rate", "rate", "frames per second");

  // magnify
  auto* magnify = app.add_subcommand("magnify", "magnify a .dsf file or directory");
  std::string mag_input, mag_band;
  magnify->add_option("--input", mag_input, ".dsf file or directory with labels.csv")->required();
  magnify->add_option("--band", mag_band, "pass band lo,hi in Hz");
  Overrides mag_o;
  mag_o.add(magnify, "--zeta", "zeta", "amplification factor");
  mag_o.add(magnify, "--gamma", "gamma", "attenuation in [0, 1]");
  mag_o.add(magnify, "--levels", "levels", "pyramid levels");

  // train
  auto* train = app.add_subcommand("train", "cross-validate and train a classifier on .dsf files");
  std::string train_input, train_report;
  train->add_option("--input", train_input, "directory of .dsf files with labels.csv")->required();
  train->add_option("--report", train_report, "report directory");
  Overrides train_o;
  train_o.add(train, "--model", "classifier", "svm or hmm");
  train_o.add(train, "--folds", "folds", "cross-validation folds");
  train_o.add(train, "--pool", "pool", "pooling grid AxR");
  train_o.add(train, "--states", "states", "HMM states");

  // classify
  auto* cls = app.add_subcommand("classify", "label one .dsf sequence with a trained model");
  std::string cls_model, cls_input;
  cls->add_option("--model", cls_model, "model .json")->required();
  cls->add_option("--input", cls_input, "sequence .dsf")->required();

  // run
  auto* run = app.add_subcommand("run", "end-to-end: extract, dsf, magnify, classify");
  std::string run_input, run_band;
  bool run_synth = false, compare = false, no_magnify = false, no_persist = false, persist_fans = false;
  run->add_option("--input", run_input, "OBJ dataset with labels.csv");
  run->add_flag("--synth", run_synth, "use the synthetic generator");
  run->add_flag("--compare", compare, "report both WV and MWV");
  run->add_flag("--no-magnify", no_magnify, "skip magnification (WV only)");
  run->add_flag("--no-persist", no_persist, "do not write .dsf files and models");
  run->add_flag("--persist-fans", persist_fans, "also write curve fans");
  run->add_option("--band", run_band, "pass band lo,hi in Hz");
  Overrides run_o;
  run_o.add(run, "--model", "classifier", "svm or hmm");
  run_o.add(run, "--curves", "curves", "radial curves per frame");
  run_o.add(run, "--samples", "samples", "points per curve");
  run_o.add(run, "--crop-radius", "crop_radius", "crop radius");
  run_o.add(run, "--zeta", "zeta", "amplification factor");
  run_o.add(run, "--gamma", "gamma", "attenuation");
  run_o.add(run, "--levels", "levels", "pyramid levels");
  run_o.add(run, "--folds", "folds", "cross-validation folds");
  run_o.add(run, "--pool", "pool", "pooling grid AxR");
  run_o.add(run, "--states", "states", "HMM states");
  run_o.add(run, "--subjects", "synth_subjects", "synthetic subjects");
  run_o.add(run, "--sequences", "synth_sequences", "synthetic sequences per class and subject");
  run_o.add(run, "--frames", "synth_frames", "synthetic frames per sequence");
  run_o.add(run, "--amplitude", "synth_amplitude", "synthetic deformation scale");
  run_o.add(run, "--noise", "synth_noise", "synthetic noise, mm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string stage = sub->get_name();
  try {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;

    if (sub == synth) {
      synth_o.apply(cfg);
      if (output.empty()) throw UsageError("--output is required");
      write_synth_dataset(cfg.synth, cfg.seed, output);
      log_stage(stage, "wrote " + std::to_string(synth_plan(cfg.synth).size()) + " sequences to " + output);
    } else if (sub == extract) {
      extract_o.apply(cfg);
      validate_config(cfg);
      if (output.empty()) throw UsageError("--output is required");
      if (is_dataset_dir(extract_input)) {
        auto rows = read_labels(extract_input);
        fs::create_directories(output);
        for (auto& r : rows) {
          const auto name = fs::path(r.path).filename().string();
          const auto meshes = load_mesh_sequence(fs::path(extract_input) / r.path);
          in_context("sequence " + name, [&] {
            save_fans(fs::path(output) / (name + ".fan"), extract_sequence(meshes, cfg));
          });
          r.path = name + ".fan";
        }
        write_labels(output, rows);
      } else {
        save_fans(output, extract_sequence(load_mesh_sequence(extract_input), cfg));
      }
    } else if (sub == dsf) {
      dsf_o.apply(cfg);
      if (output.empty()) throw UsageError("--output is required");
      if (is_dataset_dir(dsf_input)) {
        auto rows = read_labels(dsf_input);
        fs::create_directories(output);
        for (auto& r : rows) {
          const auto stem = fs::path(r.path).stem().string();
          const auto fans = load_fans(fs::path(dsf_input) / r.path);
          save_dsf(fs::path(output) / (stem + ".dsf"), dsf_sequence(fans, cfg.rate));
          r.path = stem + ".dsf";
        }
        write_labels(output, rows);
      } else {
        save_dsf(output, dsf_sequence(load_fans(dsf_input), cfg.rate));
      }
    } else if (sub == magnify) {
      mag_o.apply(cfg);
      if (!mag_band.empty()) apply_band(cfg, mag_band);
      if (output.empty()) throw UsageError("--output is required");
      std::cerr << "magnify: zeta=" << cfg.magnify.zeta << " gamma=" << cfg.magnify.gamma
                << " levels=" << cfg.magnify.levels << " band=(" << cfg.magnify.band_lo << ','
                << cfg.magnify.band_hi << ")\n";
      if (is_dataset_dir(mag_input)) {
        const auto rows = read_labels(mag_input);
        fs::create_directories(output);
        for (const auto& r : rows) {
          const auto seq = load_dsf(fs::path(mag_input) / r.path);
          save_dsf(fs::path(output) / r.path, magnify_sequence(seq, cfg.magnify).sequence);
        }
        write_labels(output, rows);
      } else {
        save_dsf(output, magnify_sequence(load_dsf(mag_input), cfg.magnify).sequence);
      }
    } else if (sub == train) {
      train_o.apply(cfg);
      validate_config(cfg);
      const auto data = load_dsf_dataset(train_input, cfg.pool);
      const auto cv = evaluate(data.wv, data.labels, data.subjects, cfg);
      write_accuracy_line(std::cout, cv);
      if (!train_report.empty()) {
        fs::create_directories(train_report);
        std::ofstream conf(fs::path(train_report) / "confusion.csv", std::ios::binary);
        write_confusion_csv(conf, cv);
        std::ofstream summary(fs::path(train_report) / "summary.csv", std::ios::binary);
        write_accuracy_line(summary, cv);
        std::ofstream pred(fs::path(train_report) / "predictions.csv", std::ios::binary);
        write_predictions_csv(pred, data, cv);
        std::vector<const SequenceFeatures*> x;
        for (const auto& f : data.wv) x.push_back(&f);
        save_model(fs::path(train_report) / "model.json", train_model(x, data.labels, cfg));
        if (!conf || !summary || !pred) throw DataError("failed writing report files");
      }
    } else if (sub == cls) {
      const auto model = load_model(cls_model);
      const auto seq = load_dsf(cls_input);
      const auto p = predict(model, sequence_features(seq, model.pool));
      std::cout << "label," << to_string(static_cast<Expression>(p.label)) << '\n';
      for (auto e : kAllExpressions) {
        std::cout << to_string(e) << ',' << format_fixed(p.scores[static_cast<int>(e)]) << '\n';
      }
    } else if (sub == run) {
      run_o.apply(cfg);
      if (!run_band.empty()) apply_band(cfg, run_band);
      if (run_synth == !run_input.empty()) throw UsageError("give exactly one of --synth or --input");
      if (compare && no_magnify) throw UsageError("--compare and --no-magnify are exclusive");
      RunOptions opts;
      if (!run_input.empty()) opts.input = run_input;
      opts.compare = compare;
      opts.magnify = !no_magnify;
      opts.persist = !no_persist;
      opts.persist_fans = persist_fans;
      opts.output = output.empty() ? "out" : output;
      opts.log = &std::cerr;
      const auto report = run_pipeline(cfg, opts);
      std::cout << "condition,accuracy,std\n";
      for (const auto& c : report.conditions) {
        std::cout << c.name << ',' << format_fixed(c.cv.mean_accuracy) << ','
                  << format_fixed(c.cv.std_accuracy) << '\n';
      }
    }
  } catch (const UsageError& e) {
    log_stage(stage, std::string("usage error: ") + e.what());
    return 1;
  } catch (const DataError& e) {
    log_stage(stage, std::string("data error: ") + e.what());
    return 2;
  } catch (const NumericalError& e) {
    log_stage(stage, std::string("numerical error: ") + e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    log_stage(stage, std::string("data error: ") + e.what());
    return 2;
  }
  return 0;
}
