#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deeppos/csi_data.hpp"
#include "deeppos/error.hpp"
#include "deeppos/optimizer.hpp"
#include "deeppos/sae.hpp"

namespace deeppos {

enum class BatchOrder {
  shuffled,  // seeded shuffle of all (SP, packet) pairs each epoch
  sp_major,  // SP by SP, packets in stored order
};

struct TrainConfig {
  EncoderDims dims{50, 30, 20, 5};
  int max_epoch = 500;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::rmsprop;
  double rmsprop_decay = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double epsilon = 1e-8;
  // 0 means one update per epoch over the summed loss of every packet.
  int batch_size = 16;
  BatchOrder order = BatchOrder::shuffled;
  double init_std = 0.1;
  std::uint64_t seed = 7;
  bool early_stop = false;
  double early_stop_tolerance = 1e-6;
  int early_stop_window = 20;
};

void validate_config(const TrainConfig& cfg);

struct TrainReport {
  std::vector<double> epoch_loss;  // full sum of squared errors after each epoch
  double wall_seconds = 0.0;
  std::size_t peak_memory_bytes = 0;
  bool early_stopped = false;

  std::string to_csv() const;
  std::string summary_line() const;
};

struct TrainResult {
  SaeModel model;
  TrainReport report;
};

/// Thrown when the loss or a gradient stops being finite; carries the report
/// up to the last finite epoch.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, TrainReport report)
      : Error(ErrorCode::divergence, message), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

/// Sums reconstruction losses over every packet with its true label.
double dataset_loss(const SaeModel& model, const FingerprintDataset& ds);

/// Byte accounting of the buffers a training run holds at once.
class AllocationTracker {
 public:
  void acquire(std::size_t bytes);
  void release(std::size_t bytes);
  std::size_t current() const { return current_; }
  std::size_t peak() const { return peak_; }

 private:
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

TrainResult train(const FingerprintDataset& ds, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// All k-subsets of {0..n-1} when there are at most `cap`, otherwise `cap`
/// distinct subsets drawn with `seed`. Each subset is sorted ascending.
std::vector<std::vector<int>> sample_combinations(int n, int k, std::size_t cap,
                                                  std::uint64_t seed);

struct TrainingOverheadRow {
  int sp_count = 0;
  std::size_t runs = 0;
  double mean_seconds = 0.0;
  double mean_peak_bytes = 0.0;
};

std::vector<TrainingOverheadRow> measure_training_overhead(const FingerprintDataset& ds,
                                                           const TrainConfig& cfg,
                                                           std::span<const int> sp_subset_sizes,
                                                           std::size_t combination_cap,
                                                           std::uint64_t seed);

std::string training_overhead_csv(std::span<const TrainingOverheadRow> rows);

}  // namespace deeppos
