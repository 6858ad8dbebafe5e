#include "deeppos/deeppos.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <string>

#include "deeppos/config.hpp"
#include "deeppos/csi_data.hpp"
#include "deeppos/error.hpp"
#include "deeppos/evaluation.hpp"
#include "deeppos/io_util.hpp"
#include "deeppos/localizer.hpp"
#include "deeppos/model_io.hpp"
#include "deeppos/synthetic_env.hpp"
#include "deeppos/trainer.hpp"

struct dp_scenario {
  deeppos::ScenarioConfig config;
};
struct dp_dataset {
  deeppos::FingerprintDataset data;
};
struct dp_train_config {
  deeppos::TrainConfig config;
};
struct dp_train_report {
  deeppos::TrainReport report;
};
struct dp_model {
  deeppos::SaeModel model;
};
struct dp_localization {
  deeppos::LocalizationResult result;
};

namespace {

thread_local std::string g_last_error;

dp_status to_status(deeppos::ErrorCode code) {
  using deeppos::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return DP_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return DP_ERR_PARSE;
    case ErrorCode::io: return DP_ERR_IO;
    case ErrorCode::degenerate_scale: return DP_ERR_DEGENERATE_SCALE;
    case ErrorCode::singular_geometry: return DP_ERR_SINGULAR_GEOMETRY;
    case ErrorCode::dimension_mismatch: return DP_ERR_DIMENSION_MISMATCH;
    case ErrorCode::divergence: return DP_ERR_DIVERGENCE;
    case ErrorCode::out_of_range: return DP_ERR_OUT_OF_RANGE;
    case ErrorCode::internal: return DP_ERR_INTERNAL;
  }
  return DP_ERR_INTERNAL;
}

template <class Fn>
dp_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return DP_OK;
  } catch (const deeppos::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return DP_ERR_INTERNAL;
  }
}

template <class T>
void require(const T* ptr, const char* what) {
  if (!ptr) deeppos::fail(deeppos::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

void copy_out(const std::string& text, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = text.size();
  if (buf && len > 0) {
    const size_t n = std::min(len - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
}

std::vector<deeppos::CsiPacket> read_packet_file(const std::filesystem::path& path,
                                                 const deeppos::NormalizationRecord& model_rec) {
  using namespace deeppos;
  const std::string text = read_text_file(path);
  std::vector<CsiPacket> packets;
  std::optional<NormalizationRecord> file_rec;

  if (text.rfind("sp_id,", 0) == 0) {
    const auto ds = dataset_from_csv(text, path.string());
    for (const auto& sp : ds.sample_points)
      for (const auto& p : sp.packets) packets.push_back(p);
  } else {
    std::string expected = "a0";
    for (size_t i = 1; i < kPacketLength; ++i) expected += ",a" + std::to_string(i);
    size_t line_no = 0;
    size_t start = 0;
    bool header = false;
    while (start <= text.size()) {
      size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!header) {
        if (line != expected)
          fail(ErrorCode::parse, path.string() + ":1: expected header 'a0,...,a89' or dataset header");
        header = true;
        continue;
      }
      if (line.empty()) {
        if (end == text.size()) break;
        continue;
      }
      CsiPacket pkt;
      size_t pos = 0;
      while (true) {
        const size_t comma = line.find(',', pos);
        double v = 0.0;
        if (!parse_double(std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos), v))
          fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": malformed amplitude");
        pkt.amplitudes.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      if (pkt.amplitudes.size() != kPacketLength)
        fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(kPacketLength) + " columns");
      packets.push_back(std::move(pkt));
      if (end == text.size()) break;
    }
  }

  const auto meta_path = metadata_path_for(path);
  if (std::filesystem::exists(meta_path)) file_rec = read_metadata(meta_path).normalization;

  for (auto& p : packets) {
    if (file_rec) {
      // Back to raw units, then onto the model's scale.
      for (double& a : p.amplitudes) a = file_rec->min + a * (file_rec->max - file_rec->min);
    }
    p.amplitudes = normalize_packet(p.amplitudes, model_rec);
  }
  return packets;
}

}  // namespace

extern "C" {

const char* dp_version(void) { return "1.0.0"; }
int dp_model_format_version(void) { return deeppos::kModelFormatVersion; }

const char* dp_status_string(dp_status status) {
  switch (status) {
    case DP_OK: return "ok";
    case DP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DP_ERR_PARSE: return "parse error";
    case DP_ERR_IO: return "i/o error";
    case DP_ERR_DEGENERATE_SCALE: return "degenerate scale";
    case DP_ERR_SINGULAR_GEOMETRY: return "singular geometry";
    case DP_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case DP_ERR_DIVERGENCE: return "divergence";
    case DP_ERR_OUT_OF_RANGE: return "out of range";
    case DP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* dp_last_error(void) { return g_last_error.c_str(); }

dp_status dp_scenario_load(const char* path, dp_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dp_scenario{deeppos::load_scenario(path)};
  });
}

void dp_scenario_free(dp_scenario* scenario) { delete scenario; }

dp_status dp_scenario_set_seed(dp_scenario* scenario, uint64_t seed) {
  return guarded([&] {
    require(scenario, "scenario");
    scenario->config.environment.rng_seed = seed;
  });
}

dp_status dp_scenario_set_grid(dp_scenario* scenario, double spacing, int packets_per_sp) {
  return guarded([&] {
    require(scenario, "scenario");
    if (spacing > 0.0) scenario->config.grid.spacing = spacing;
    if (packets_per_sp > 0) scenario->config.grid.packets_per_sp = packets_per_sp;
  });
}

dp_status dp_scenario_train_config(const dp_scenario* scenario, dp_train_config** out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out, "out");
    *out = new dp_train_config{scenario->config.train.value_or(deeppos::TrainConfig{})};
  });
}

dp_status dp_generate(const dp_scenario* scenario, dp_dataset** out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out, "out");
    *out = new dp_dataset{
        deeppos::generate_dataset(scenario->config.environment, scenario->config.grid)};
  });
}

dp_status dp_dataset_load(const char* csv_path, dp_dataset** out) {
  return guarded([&] {
    require(csv_path, "path");
    require(out, "out");
    *out = new dp_dataset{deeppos::load_dataset(csv_path)};
  });
}

dp_status dp_dataset_save(const dp_dataset* dataset, const char* csv_path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(csv_path, "path");
    deeppos::write_dataset(dataset->data, csv_path);
  });
}

void dp_dataset_free(dp_dataset* dataset) { delete dataset; }

size_t dp_dataset_sp_count(const dp_dataset* dataset) {
  return dataset ? dataset->data.size() : 0;
}

size_t dp_dataset_packet_count(const dp_dataset* dataset, size_t sp) {
  if (!dataset || sp >= dataset->data.size()) return 0;
  return dataset->data.sample_points[sp].packets.size();
}

int dp_dataset_is_normalized(const dp_dataset* dataset) {
  return dataset && dataset->data.normalization ? 1 : 0;
}

size_t dp_dataset_validate(const dp_dataset* dataset) {
  if (!dataset) return 1;
  return deeppos::validate_dataset(dataset->data).size();
}

dp_status dp_dataset_select(const dp_dataset* dataset, const int* sp_ids, size_t count,
                            dp_dataset** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(sp_ids, "sp_ids");
    require(out, "out");
    *out = new dp_dataset{deeppos::select_sample_points(dataset->data, {sp_ids, count})};
  });
}

dp_status dp_train_config_default(dp_train_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dp_train_config{};
  });
}

dp_status dp_train_config_load(const char* path, dp_train_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dp_train_config{deeppos::load_train_config(path)};
  });
}

void dp_train_config_free(dp_train_config* config) { delete config; }

dp_status dp_train_config_set_seed(dp_train_config* config, uint64_t seed) {
  return guarded([&] {
    require(config, "config");
    config->config.seed = seed;
  });
}

dp_status dp_train_config_set_max_epoch(dp_train_config* config, int max_epoch) {
  return guarded([&] {
    require(config, "config");
    if (max_epoch < 1) deeppos::fail(deeppos::ErrorCode::invalid_argument, "max_epoch must be >= 1");
    config->config.max_epoch = max_epoch;
  });
}

dp_status dp_train_config_set_dims(dp_train_config* config, int k1, int k2, int k3, int k4) {
  return guarded([&] {
    require(config, "config");
    const deeppos::EncoderDims dims{k1, k2, k3, k4};
    deeppos::check_dims(dims);
    config->config.dims = dims;
  });
}

dp_status dp_train(const dp_dataset* dataset, const dp_train_config* config,
                   dp_model** model_out, dp_train_report** report_out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(model_out, "model_out");
    auto result = deeppos::train(dataset->data, config->config);
    *model_out = new dp_model{std::move(result.model)};
    if (report_out) *report_out = new dp_train_report{std::move(result.report)};
  });
}

size_t dp_train_report_epoch_count(const dp_train_report* report) {
  return report ? report->report.epoch_loss.size() : 0;
}

dp_status dp_train_report_loss(const dp_train_report* report, size_t epoch_index, double* loss) {
  return guarded([&] {
    require(report, "report");
    require(loss, "loss");
    if (epoch_index >= report->report.epoch_loss.size())
      deeppos::fail(deeppos::ErrorCode::out_of_range, "epoch index out of range");
    *loss = report->report.epoch_loss[epoch_index];
  });
}

double dp_train_report_wall_seconds(const dp_train_report* report) {
  return report ? report->report.wall_seconds : 0.0;
}

size_t dp_train_report_peak_memory(const dp_train_report* report) {
  return report ? report->report.peak_memory_bytes : 0;
}

dp_status dp_train_report_write_csv(const dp_train_report* report, const char* path) {
  return guarded([&] {
    require(report, "report");
    require(path, "path");
    deeppos::write_file_atomic(path, report->report.to_csv());
  });
}

dp_status dp_train_report_summary(const dp_train_report* report, char* buf, size_t len,
                                  size_t* needed) {
  return guarded([&] {
    require(report, "report");
    copy_out(report->report.summary_line(), buf, len, needed);
  });
}

void dp_train_report_free(dp_train_report* report) { delete report; }

dp_status dp_model_load(const char* path, dp_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dp_model{deeppos::load_model(path)};
  });
}

dp_status dp_model_save(const dp_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    deeppos::save_model(model->model, path);
  });
}

void dp_model_free(dp_model* model) { delete model; }

int dp_model_label_count(const dp_model* model) { return model ? model->model.label_count : 0; }

dp_status dp_model_forward(const dp_model* model, const double* packet, size_t length, int label,
                           double* out, size_t out_length) {
  return guarded([&] {
    require(model, "model");
    require(packet, "packet");
    require(out, "out");
    if (out_length < deeppos::kPacketLength)
      deeppos::fail(deeppos::ErrorCode::dimension_mismatch, "output buffer shorter than 90");
    const auto r = deeppos::forward(model->model, {packet, length}, label);
    for (Eigen::Index i = 0; i < r.output.size(); ++i) out[i] = r.output(i);
  });
}

dp_status dp_localize(const dp_model* model, const double* packets, size_t count, int normalized,
                      int candidates, dp_localization** out) {
  return guarded([&] {
    require(model, "model");
    require(packets, "packets");
    require(out, "out");
    std::vector<deeppos::CsiPacket> pkts(count);
    for (size_t l = 0; l < count; ++l) {
      std::span<const double> row(packets + l * deeppos::kPacketLength, deeppos::kPacketLength);
      pkts[l].amplitudes = normalized ? std::vector<double>(row.begin(), row.end())
                                      : deeppos::normalize_packet(row, model->model.normalization);
    }
    *out = new dp_localization{deeppos::localize(model->model, pkts, candidates)};
  });
}

dp_status dp_localize_file(const dp_model* model, const char* packets_csv, int candidates,
                           dp_localization** out) {
  return guarded([&] {
    require(model, "model");
    require(packets_csv, "packets_csv");
    require(out, "out");
    const auto pkts = read_packet_file(packets_csv, model->model.normalization);
    *out = new dp_localization{deeppos::localize(model->model, pkts, candidates)};
  });
}

dp_status dp_localization_estimate(const dp_localization* loc, double* x, double* y) {
  return guarded([&] {
    require(loc, "localization");
    require(x, "x");
    require(y, "y");
    *x = loc->result.estimate.x;
    *y = loc->result.estimate.y;
  });
}

size_t dp_localization_label_count(const dp_localization* loc) {
  return loc ? loc->result.per_label_errors.size() : 0;
}

dp_status dp_localization_label_error(const dp_localization* loc, size_t label, double* error) {
  return guarded([&] {
    require(loc, "localization");
    require(error, "error");
    if (label >= loc->result.per_label_errors.size())
      deeppos::fail(deeppos::ErrorCode::out_of_range, "label out of range");
    *error = loc->result.per_label_errors[label];
  });
}

dp_status dp_localization_to_json(const dp_localization* loc, char* buf, size_t len,
                                  size_t* needed) {
  return guarded([&] {
    require(loc, "localization");
    copy_out(loc->result.to_json(), buf, len, needed);
  });
}

void dp_localization_free(dp_localization* loc) { delete loc; }

void dp_eval_options_init(dp_eval_options* options) {
  if (!options) return;
  options->candidates = 2;
  options->packets = 5;
  options->seed = 7;
  options->threads = 1;
  options->overhead_sizes = nullptr;
  options->overhead_size_count = 0;
  options->overhead_cap = 3;
}

dp_status dp_evaluate(const dp_dataset* dataset, const dp_train_config* config,
                      const dp_eval_options* options, const char* out_dir, double* mean_error,
                      double* baseline_mean_error) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(options, "options");
    require(out_dir, "out_dir");
    deeppos::LoocvOptions opt;
    opt.candidates = options->candidates;
    opt.packets = options->packets;
    opt.seed = options->seed;
    opt.threads = options->threads;

    std::vector<int> sizes;
    if (options->overhead_size_count > 0) {
      require(options->overhead_sizes, "overhead_sizes");
      sizes.assign(options->overhead_sizes, options->overhead_sizes + options->overhead_size_count);
    }

    const auto result = deeppos::loocv(dataset->data, config->config, opt);
    std::vector<deeppos::TrainingOverheadRow> train_rows;
    std::vector<deeppos::OnlineOverheadRow> online_rows;
    if (!sizes.empty()) {
      train_rows = deeppos::measure_training_overhead(dataset->data, config->config, sizes,
                                                      options->overhead_cap, options->seed);
      online_rows = deeppos::measure_online_overhead(dataset->data, config->config, sizes, opt,
                                                     options->overhead_cap);
    }
    // Everything is computed before the first file lands.
    const std::filesystem::path dir(out_dir);
    deeppos::write_evaluation(dir, result, opt.candidates, opt.packets);
    if (!sizes.empty()) {
      deeppos::write_file_atomic(dir / "training_overhead.csv",
                                 deeppos::training_overhead_csv(train_rows));
      deeppos::write_file_atomic(dir / "online_overhead.csv",
                                 deeppos::online_overhead_csv(online_rows));
    }
    if (mean_error) *mean_error = result.summary.mean_error;
    if (baseline_mean_error) *baseline_mean_error = result.summary.baseline_mean_error;
  });
}

}  // extern "C"
