// deeppos command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deeppos/deeppos.h"

namespace fs = std::filesystem;

namespace {

struct CliError {
  dp_status status;
  std::string message;
};

void check(dp_status s, const std::string& context) {
  if (s != DP_OK) throw CliError{s, context + ": " + dp_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ScenarioPtr = std::unique_ptr<dp_scenario, Deleter<dp_scenario, dp_scenario_free>>;
using DatasetPtr = std::unique_ptr<dp_dataset, Deleter<dp_dataset, dp_dataset_free>>;
using ConfigPtr = std::unique_ptr<dp_train_config, Deleter<dp_train_config, dp_train_config_free>>;
using ReportPtr = std::unique_ptr<dp_train_report, Deleter<dp_train_report, dp_train_report_free>>;
using ModelPtr = std::unique_ptr<dp_model, Deleter<dp_model, dp_model_free>>;
using LocPtr = std::unique_ptr<dp_localization, Deleter<dp_localization, dp_localization_free>>;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) throw CliError{DP_ERR_IO, "cannot create directory '" + dir.string() + "'"};
}

ConfigPtr load_config(const std::string& path) {
  dp_train_config* raw = nullptr;
  if (path.empty()) check(dp_train_config_default(&raw), "default config");
  else check(dp_train_config_load(path.c_str(), &raw), "config '" + path + "'");
  return ConfigPtr(raw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor localization with a supervised autoencoder over CSI fingerprints"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  unsigned threads = 1;
  app.add_flag("--version", show_version, "Print library and model-file format versions");
  app.add_option("--threads", threads, "Worker threads for leave-one-out folds (0 = all cores)");

  // generate
  auto* gen = app.add_subcommand("generate", "Simulate a CSI fingerprint survey");
  std::string env_path;
  std::string gen_out;
  std::optional<std::uint64_t> gen_seed;
  double spacing = 0.0;
  int packets_per_sp = 0;
  gen->add_option("--env", env_path, "Scenario/environment JSON file")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Override the environment RNG seed");
  gen->add_option("--spacing", spacing, "Override grid spacing (m)");
  gen->add_option("--packets", packets_per_sp, "Override packets per sample point");

  // train
  auto* tr = app.add_subcommand("train", "Train a model on a fingerprint dataset");
  std::string tr_dataset;
  std::string tr_config;
  std::string tr_out;
  std::string tr_report;
  std::optional<std::uint64_t> tr_seed;
  int tr_epochs = 0;
  tr->add_option("--dataset", tr_dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("--config", tr_config, "Training config (scenario file or bare block)")->check(CLI::ExistingFile);
  tr->add_option("--out", tr_out, "Model file (default: model.json next to the dataset)");
  tr->add_option("--report", tr_report, "Loss CSV (default: <model stem>.loss.csv)");
  tr->add_option("--seed", tr_seed, "Override the training seed");
  tr->add_option("--epochs", tr_epochs, "Override max_epoch");

  // localize
  auto* loc = app.add_subcommand("localize", "Estimate the position of a set of test packets");
  std::string loc_model;
  std::string loc_packets;
  std::string loc_out;
  int loc_r = 2;
  std::optional<std::uint64_t> loc_seed;
  loc->add_option("--model", loc_model, "Model file")->required()->check(CLI::ExistingFile);
  loc->add_option("--packets", loc_packets, "Packet CSV")->required()->check(CLI::ExistingFile);
  loc->add_option("--r", loc_r, "Number of candidate sample points");
  loc->add_option("--out", loc_out, "Also write the result JSON here");
  loc->add_option("--seed", loc_seed, "Accepted for uniformity; localization is deterministic");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Leave-one-out evaluation");
  std::string ev_dataset;
  std::string ev_config;
  std::string ev_out;
  int ev_r = 2;
  int ev_p = 5;
  std::optional<std::uint64_t> ev_seed;
  int ev_epochs = 0;
  std::vector<int> overhead_sizes;
  std::size_t overhead_cap = 3;
  ev->add_option("--dataset", ev_dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--config", ev_config, "Training config")->check(CLI::ExistingFile);
  ev->add_option("--r", ev_r, "Number of candidate sample points");
  ev->add_option("--p", ev_p, "Packets per localization");
  ev->add_option("--out", ev_out, "Output directory")->required();
  ev->add_option("--seed", ev_seed, "Seed for training and packet draws");
  ev->add_option("--epochs", ev_epochs, "Override max_epoch");
  ev->add_option("--overhead-sizes", overhead_sizes, "Subset sizes for overhead tables")->delimiter(',');
  ev->add_option("--overhead-cap", overhead_cap, "Combinations sampled per subset size");

  CLI11_PARSE(app, argc, argv);

  if (show_version) {
    std::cout << "deeppos " << dp_version() << " (model format " << dp_model_format_version()
              << ")\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*gen) {
      dp_scenario* raw = nullptr;
      check(dp_scenario_load(env_path.c_str(), &raw), "environment '" + env_path + "'");
      ScenarioPtr scenario(raw);
      if (gen_seed) check(dp_scenario_set_seed(scenario.get(), *gen_seed), "seed");
      check(dp_scenario_set_grid(scenario.get(), spacing, packets_per_sp), "grid");
      dp_dataset* ds_raw = nullptr;
      check(dp_generate(scenario.get(), &ds_raw), "generate");
      DatasetPtr ds(ds_raw);
      ensure_dir(gen_out);
      const auto csv = (fs::path(gen_out) / "fingerprints.csv").string();
      check(dp_dataset_save(ds.get(), csv.c_str()), "write '" + csv + "'");
      std::cout << "wrote " << csv << " (" << dp_dataset_sp_count(ds.get())
                << " sample points)\n";
    } else if (*tr) {
      dp_dataset* ds_raw = nullptr;
      check(dp_dataset_load(tr_dataset.c_str(), &ds_raw), "dataset '" + tr_dataset + "'");
      DatasetPtr ds(ds_raw);
      auto cfg = load_config(tr_config);
      if (tr_seed) check(dp_train_config_set_seed(cfg.get(), *tr_seed), "seed");
      if (tr_epochs > 0) check(dp_train_config_set_max_epoch(cfg.get(), tr_epochs), "epochs");
      fs::path model_path = tr_out.empty() ? fs::path(tr_dataset).parent_path() / "model.json"
                                           : fs::path(tr_out);
      fs::path report_path = tr_report;
      if (report_path.empty()) {
        report_path = model_path;
        report_path.replace_extension(".loss.csv");
      }
      dp_model* m_raw = nullptr;
      dp_train_report* r_raw = nullptr;
      check(dp_train(ds.get(), cfg.get(), &m_raw, &r_raw), "train");
      ModelPtr model(m_raw);
      ReportPtr report(r_raw);
      ensure_dir(model_path.parent_path());
      ensure_dir(report_path.parent_path());
      check(dp_model_save(model.get(), model_path.string().c_str()), "write model");
      check(dp_train_report_write_csv(report.get(), report_path.string().c_str()), "write report");
      std::size_t needed = 0;
      check(dp_train_report_summary(report.get(), nullptr, 0, &needed), "summary");
      std::string summary(needed + 1, '\0');
      check(dp_train_report_summary(report.get(), summary.data(), summary.size(), nullptr), "summary");
      summary.resize(needed);
      std::cout << summary << "\nwrote " << model_path.string() << "\n";
    } else if (*loc) {
      dp_model* m_raw = nullptr;
      check(dp_model_load(loc_model.c_str(), &m_raw), "model '" + loc_model + "'");
      ModelPtr model(m_raw);
      dp_localization* l_raw = nullptr;
      check(dp_localize_file(model.get(), loc_packets.c_str(), loc_r, &l_raw), "localize");
      LocPtr result(l_raw);
      std::size_t needed = 0;
      check(dp_localization_to_json(result.get(), nullptr, 0, &needed), "format");
      std::string text(needed + 1, '\0');
      check(dp_localization_to_json(result.get(), text.data(), text.size(), nullptr), "format");
      text.resize(needed);
      std::cout << text;
      if (!loc_out.empty()) {
        const fs::path tmp = fs::path(loc_out).string() + ".tmp";
        {
          std::ofstream f(tmp, std::ios::binary);
          f << text;
          if (!f) throw CliError{DP_ERR_IO, "cannot write '" + tmp.string() + "'"};
        }
        fs::rename(tmp, loc_out);
      }
    } else if (*ev) {
      dp_dataset* ds_raw = nullptr;
      check(dp_dataset_load(ev_dataset.c_str(), &ds_raw), "dataset '" + ev_dataset + "'");
      DatasetPtr ds(ds_raw);
      auto cfg = load_config(ev_config);
      dp_eval_options opt;
      dp_eval_options_init(&opt);
      opt.candidates = ev_r;
      opt.packets = ev_p;
      opt.threads = threads;
      if (ev_seed) {
        opt.seed = *ev_seed;
        check(dp_train_config_set_seed(cfg.get(), *ev_seed), "seed");
      }
      if (ev_epochs > 0) check(dp_train_config_set_max_epoch(cfg.get(), ev_epochs), "epochs");
      opt.overhead_sizes = overhead_sizes.empty() ? nullptr : overhead_sizes.data();
      opt.overhead_size_count = overhead_sizes.size();
      opt.overhead_cap = overhead_cap;
      double mean = 0.0;
      double baseline = 0.0;
      check(dp_evaluate(ds.get(), cfg.get(), &opt, ev_out.c_str(), &mean, &baseline), "evaluate");
      std::cout << "mean error " << mean << " m, centroid baseline " << baseline
                << " m; results in " << ev_out << "\n";
    }
  } catch (const CliError& e) {
    std::cerr << "deeppos: " << e.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "deeppos: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
