#include "deeppos/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "deeppos/io_util.hpp"

namespace deeppos {

namespace {

struct PackedData {
  Eigen::MatrixXd packets;  // 90 x M, SP-major
  std::vector<int> labels;
};

PackedData pack(const FingerprintDataset& ds) {
  PackedData d;
  d.packets.resize(static_cast<Eigen::Index>(kPacketLength),
                   static_cast<Eigen::Index>(ds.total_packets()));
  d.labels.reserve(ds.total_packets());
  Eigen::Index col = 0;
  for (const auto& sp : ds.sample_points) {
    for (const auto& pkt : sp.packets) {
      d.packets.col(col++) = Eigen::Map<const Eigen::VectorXd>(pkt.amplitudes.data(),
                                                               static_cast<Eigen::Index>(kPacketLength));
      d.labels.push_back(sp.id);
    }
  }
  return d;
}

double packed_loss(const SaeModel& model, const PackedData& d) {
  const Eigen::MatrixXd out = forward_batch(model, d.packets, d.labels);
  return (out - d.packets).squaredNorm();
}

std::size_t activation_bytes(const EncoderDims& k, int labels, std::size_t batch) {
  const std::size_t per_column = 2 * kPacketLength + 2 * static_cast<std::size_t>(k[0] + k[1] + k[2]) +
                                 static_cast<std::size_t>(2 * k[3] + labels);
  // Forward activations plus one delta buffer of the same extent.
  return 2 * per_column * batch * sizeof(double);
}

}  // namespace

void AllocationTracker::acquire(std::size_t bytes) {
  current_ += bytes;
  peak_ = std::max(peak_, current_);
}

void AllocationTracker::release(std::size_t bytes) { current_ -= std::min(bytes, current_); }

void validate_config(const TrainConfig& cfg) {
  check_dims(cfg.dims);
  if (cfg.max_epoch < 1) fail(ErrorCode::invalid_argument, "max_epoch must be >= 1");
  if (!(cfg.learning_rate > 0.0)) fail(ErrorCode::invalid_argument, "learning rate must be positive");
  if (!(cfg.rmsprop_decay > 0.0 && cfg.rmsprop_decay < 1.0))
    fail(ErrorCode::invalid_argument, "RMSprop decay must lie in (0,1)");
  if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0) ||
      !(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0))
    fail(ErrorCode::invalid_argument, "Adam betas must lie in [0,1)");
  if (!(cfg.epsilon > 0.0)) fail(ErrorCode::invalid_argument, "epsilon must be positive");
  if (cfg.batch_size < 0) fail(ErrorCode::invalid_argument, "batch size must be >= 0");
  if (!(cfg.init_std > 0.0)) fail(ErrorCode::invalid_argument, "init_std must be positive");
  if (cfg.early_stop && cfg.early_stop_window < 1)
    fail(ErrorCode::invalid_argument, "early stop window must be >= 1");
}

std::string TrainReport::to_csv() const {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < epoch_loss.size(); ++e)
    out += std::to_string(e + 1) + ',' + format_double(epoch_loss[e]) + '\n';
  return out;
}

std::string TrainReport::summary_line() const {
  std::ostringstream s;
  s << "epochs=" << epoch_loss.size();
  if (!epoch_loss.empty())
    s << " first_loss=" << format_double(epoch_loss.front())
      << " final_loss=" << format_double(epoch_loss.back());
  s << " wall_seconds=" << wall_seconds << " peak_memory_bytes=" << peak_memory_bytes
    << " early_stopped=" << (early_stopped ? "yes" : "no");
  return s.str();
}

double dataset_loss(const SaeModel& model, const FingerprintDataset& ds) {
  return packed_loss(model, pack(ds));
}

TrainResult train(const FingerprintDataset& ds, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  validate_config(cfg);
  const auto issues = validate_dataset(ds);
  if (!issues.empty())
    fail(ErrorCode::invalid_argument, "dataset failed validation:\n" + format_report(issues));
  if (!ds.normalization)
    fail(ErrorCode::invalid_argument, "training requires a normalized dataset");

  const auto t0 = std::chrono::steady_clock::now();
  const int n_labels = static_cast<int>(ds.size());
  AllocationTracker mem;

  TrainResult result;
  SaeModel& model = result.model;
  model = init_model(cfg.dims, n_labels, cfg.seed, cfg.init_std);
  for (const auto& sp : ds.sample_points)
    model.sp_coordinates[static_cast<std::size_t>(sp.id)] = {sp.id, sp.position};
  model.normalization = *ds.normalization;
  model.optimizer = std::string(to_string(cfg.optimizer));
  model.hyperparameters = {
      {"learning_rate", format_double(cfg.learning_rate)},
      {"max_epoch", std::to_string(cfg.max_epoch)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"batch_order", cfg.order == BatchOrder::shuffled ? "shuffled" : "sp_major"},
      {"rmsprop_decay", format_double(cfg.rmsprop_decay)},
      {"epsilon", format_double(cfg.epsilon)},
      {"init_std", format_double(cfg.init_std)},
  };
  const std::size_t param_bytes = model.params.scalar_count() * sizeof(double);
  mem.acquire(param_bytes);

  const PackedData data = pack(ds);
  const std::size_t total = data.labels.size();
  mem.acquire(static_cast<std::size_t>(data.packets.size()) * sizeof(double) +
              total * sizeof(int));

  Optimizer opt(cfg.optimizer, model.params, cfg.learning_rate, cfg.rmsprop_decay,
                cfg.adam_beta1, cfg.adam_beta2, cfg.epsilon);
  mem.acquire(opt.state_bytes());
  SaeParameters grads = model.params.zeros_like();
  mem.acquire(param_bytes);

  const std::size_t batch = cfg.batch_size == 0 ? total
                                                : std::min<std::size_t>(total, static_cast<std::size_t>(cfg.batch_size));
  const std::size_t act = activation_bytes(cfg.dims, n_labels, batch);
  const std::size_t eval_act = activation_bytes(cfg.dims, n_labels, total) / 2;

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0xba7c4));
  Eigen::MatrixXd batch_packets(static_cast<Eigen::Index>(kPacketLength), static_cast<Eigen::Index>(batch));
  std::vector<int> batch_labels(batch);
  mem.acquire(static_cast<std::size_t>(batch_packets.size()) * sizeof(double));

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  for (int epoch = 1; epoch <= cfg.max_epoch; ++epoch) {
    if (cfg.order == BatchOrder::shuffled)
      std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < total; start += batch) {
      const std::size_t count = std::min(batch, total - start);
      if (static_cast<std::size_t>(batch_packets.cols()) != count) {
        batch_packets.resize(Eigen::NoChange, static_cast<Eigen::Index>(count));
        batch_labels.resize(count);
      }
      for (std::size_t i = 0; i < count; ++i) {
        batch_packets.col(static_cast<Eigen::Index>(i)) =
            data.packets.col(static_cast<Eigen::Index>(order[start + i]));
        batch_labels[i] = data.labels[order[start + i]];
      }
      for (auto t : grads.tensors()) std::fill(t.begin(), t.end(), 0.0);
      mem.acquire(act);
      accumulate_gradients(model, batch_packets, batch_labels, grads);
      mem.release(act);
      try {
        opt.step(model.params, grads);
      } catch (const Error& e) {
        result.report.wall_seconds = elapsed();
        result.report.peak_memory_bytes = mem.peak();
        throw DivergenceError(std::string(e.what()) + " during epoch " + std::to_string(epoch),
                              result.report);
      }
    }

    mem.acquire(eval_act);
    const double loss = packed_loss(model, data);
    mem.release(eval_act);
    if (!std::isfinite(loss)) {
      result.report.wall_seconds = elapsed();
      result.report.peak_memory_bytes = mem.peak();
      throw DivergenceError("loss became non-finite at epoch " + std::to_string(epoch),
                            result.report);
    }
    result.report.epoch_loss.push_back(loss);
    if (on_epoch) on_epoch(epoch, loss);

    if (cfg.early_stop && epoch > cfg.early_stop_window) {
      const double before = result.report.epoch_loss[static_cast<std::size_t>(epoch - 1 - cfg.early_stop_window)];
      if (before > 0.0 && (before - loss) / before < cfg.early_stop_tolerance) {
        result.report.early_stopped = true;
        break;
      }
    }
  }

  result.report.wall_seconds = elapsed();
  result.report.peak_memory_bytes = mem.peak();
  return result;
}

std::vector<std::vector<int>> sample_combinations(int n, int k, std::size_t cap,
                                                  std::uint64_t seed) {
  if (cap == 0) fail(ErrorCode::invalid_argument, "combination cap must be >= 1");
  if (k < 1 || k > n)
    fail(ErrorCode::out_of_range, "subset size " + std::to_string(k) + " outside [1, " +
                                      std::to_string(n) + "]");

  // C(n, k), saturating once it passes the cap.
  std::size_t count = 1;
  bool over = false;
  for (int i = 1; i <= k; ++i) {
    count = count * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    if (count > cap) {
      over = true;
      break;
    }
  }

  std::vector<std::vector<int>> out;
  if (!over) {
    std::vector<int> c(static_cast<std::size_t>(k));
    std::iota(c.begin(), c.end(), 0);
    while (true) {
      out.push_back(c);
      int i = k - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
      if (i < 0) break;
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
  }

  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)));
  std::set<std::vector<int>> seen;
  std::vector<int> pool(static_cast<std::size_t>(n));
  while (out.size() < cap) {
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> c(pool.begin(), pool.begin() + k);
    std::sort(c.begin(), c.end());
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

std::vector<TrainingOverheadRow> measure_training_overhead(const FingerprintDataset& ds,
                                                           const TrainConfig& cfg,
                                                           std::span<const int> sp_subset_sizes,
                                                           std::size_t combination_cap,
                                                           std::uint64_t seed) {
  if (combination_cap == 0) fail(ErrorCode::invalid_argument, "combination cap must be >= 1");
  std::vector<TrainingOverheadRow> rows;
  for (int k : sp_subset_sizes) {
    if (k < 2 || static_cast<std::size_t>(k) > ds.size())
      fail(ErrorCode::out_of_range, "subset size " + std::to_string(k) + " outside [2, " +
                                        std::to_string(ds.size()) + "]");
    const auto combos = sample_combinations(static_cast<int>(ds.size()), k, combination_cap, seed);
    TrainingOverheadRow row;
    row.sp_count = k;
    row.runs = combos.size();
    for (const auto& combo : combos) {
      const auto sub = select_sample_points(ds, combo);
      const auto r = train(sub, cfg);
      row.mean_seconds += r.report.wall_seconds;
      row.mean_peak_bytes += static_cast<double>(r.report.peak_memory_bytes);
    }
    row.mean_seconds /= static_cast<double>(row.runs);
    row.mean_peak_bytes /= static_cast<double>(row.runs);
    rows.push_back(row);
  }
  return rows;
}

std::string training_overhead_csv(std::span<const TrainingOverheadRow> rows) {
  std::string out = "sp_count,runs,mean_train_seconds,mean_peak_memory_bytes\n";
  for (const auto& r : rows)
    out += std::to_string(r.sp_count) + ',' + std::to_string(r.runs) + ',' +
           format_double(r.mean_seconds) + ',' + format_double(r.mean_peak_bytes) + '\n';
  return out;
}

}  // namespace deeppos
