#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "deeppos/csi_data.hpp"
#include "deeppos/localizer.hpp"
#include "deeppos/trainer.hpp"

namespace deeppos {

double localization_error(Position estimate, Position truth);

/// Location-independent predictor: centroid of the training coordinates.
Position naive_baseline(std::span<const Position> training_positions);

struct CdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;
};

/// Fraction of errors <= each threshold. Thresholds must ascend.
std::vector<CdfPoint> error_cdf(std::span<const double> errors, std::span<const double> thresholds);

/// 0, step, 2*step, ... up to the first multiple of `step` >= max(errors).
std::vector<double> default_cdf_thresholds(std::span<const double> errors, double step = 0.1);

/// Linear-interpolated quantile, q in [0,1].
double error_percentile(std::span<const double> errors, double q);

struct FoldResult {
  int held_out_sp = 0;
  Position truth;
  Position estimate;
  double error = 0.0;
  Position baseline_estimate;
  double baseline_error = 0.0;
  double online_seconds = 0.0;
  double train_seconds = 0.0;
  bool failed = false;
  std::string failure;
};

struct EvalSummary {
  std::size_t folds = 0;
  std::size_t failed_folds = 0;
  double mean_error = 0.0;
  double median_error = 0.0;
  double std_error = 0.0;  // sample standard deviation
  double percentile80 = 0.0;
  double baseline_mean_error = 0.0;
  std::vector<CdfPoint> cdf;
  double mean_online_seconds = 0.0;
  double mean_train_seconds = 0.0;
  double total_online_seconds = 0.0;
  double total_train_seconds = 0.0;
};

struct LoocvOptions {
  int candidates = 2;        // R
  int packets = 5;           // p
  std::uint64_t seed = 7;
  unsigned threads = 1;      // 0 = hardware concurrency
  double error_floor = kDefaultErrorFloor;
};

struct LoocvResult {
  std::vector<FoldResult> folds;
  EvalSummary summary;
};

/// Retrains on N-1 sample points per fold (labels re-indexed), localizes p
/// seeded packets of the held-out point, and aggregates in fold order.
/// A fold whose training fails is recorded as failed and skipped in the
/// statistics.
LoocvResult loocv(const FingerprintDataset& ds, const TrainConfig& cfg, const LoocvOptions& opt);

EvalSummary summarize(std::span<const FoldResult> folds);

struct OnlineOverheadRow {
  int sp_count = 0;
  std::size_t combinations = 0;
  double mean_error = 0.0;
  double mean_online_seconds = 0.0;
  double mean_decodes = 0.0;  // decode calls per localization
};

std::vector<OnlineOverheadRow> measure_online_overhead(const FingerprintDataset& ds,
                                                       const TrainConfig& cfg,
                                                       std::span<const int> sp_subset_sizes,
                                                       const LoocvOptions& opt,
                                                       std::size_t combination_cap);

std::string online_overhead_csv(std::span<const OnlineOverheadRow> rows);

// Deterministic tables (no timings).
std::string folds_csv(std::span<const FoldResult> folds);
std::string cdf_csv(std::span<const CdfPoint> cdf);
// Per-fold wall times.
std::string timing_csv(std::span<const FoldResult> folds);
std::string summary_text(const EvalSummary& s, int candidates, int packets);

/// Published testbed figures, printed for context next to synthetic results.
std::string reference_table_text();

void write_evaluation(const std::filesystem::path& out_dir, const LoocvResult& result,
                      int candidates, int packets);

}  // namespace deeppos
