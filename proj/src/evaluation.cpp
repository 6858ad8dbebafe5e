#include "deeppos/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "deeppos/error.hpp"
#include "deeppos/io_util.hpp"

namespace deeppos {

double localization_error(Position estimate, Position truth) {
  return std::hypot(estimate.x - truth.x, estimate.y - truth.y);
}

Position naive_baseline(std::span<const Position> training_positions) {
  if (training_positions.empty())
    fail(ErrorCode::invalid_argument, "baseline needs at least one training position");
  double x = 0.0;
  double y = 0.0;
  for (const auto& p : training_positions) {
    x += p.x;
    y += p.y;
  }
  const double n = static_cast<double>(training_positions.size());
  return {x / n, y / n};
}

std::vector<CdfPoint> error_cdf(std::span<const double> errors,
                                std::span<const double> thresholds) {
  if (errors.empty()) fail(ErrorCode::invalid_argument, "CDF of an empty error list");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    fail(ErrorCode::invalid_argument, "CDF thresholds must be sorted ascending");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back({t, static_cast<double>(below) / static_cast<double>(sorted.size())});
  }
  return out;
}

std::vector<double> default_cdf_thresholds(std::span<const double> errors, double step) {
  if (errors.empty()) fail(ErrorCode::invalid_argument, "no errors to bracket");
  if (!(step > 0.0)) fail(ErrorCode::invalid_argument, "threshold step must be positive");
  const double hi = *std::max_element(errors.begin(), errors.end());
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double t = i * step;
    out.push_back(t);
    if (t >= hi) break;
  }
  return out;
}

double error_percentile(std::span<const double> errors, double q) {
  if (errors.empty()) fail(ErrorCode::invalid_argument, "percentile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorCode::out_of_range, "quantile must lie in [0, 1]");
  std::vector<double> s(errors.begin(), errors.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

EvalSummary summarize(std::span<const FoldResult> folds) {
  EvalSummary s;
  s.folds = folds.size();
  std::vector<double> errors;
  double baseline = 0.0;
  for (const auto& f : folds) {
    if (f.failed) {
      ++s.failed_folds;
      continue;
    }
    errors.push_back(f.error);
    baseline += f.baseline_error;
    s.total_online_seconds += f.online_seconds;
    s.total_train_seconds += f.train_seconds;
  }
  if (errors.empty()) return s;
  const double n = static_cast<double>(errors.size());
  s.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  s.median_error = error_percentile(errors, 0.5);
  s.percentile80 = error_percentile(errors, 0.8);
  if (errors.size() > 1) {
    double ss = 0.0;
    for (double e : errors) ss += (e - s.mean_error) * (e - s.mean_error);
    s.std_error = std::sqrt(ss / (n - 1.0));
  }
  s.baseline_mean_error = baseline / n;
  s.cdf = error_cdf(errors, default_cdf_thresholds(errors));
  s.mean_online_seconds = s.total_online_seconds / n;
  s.mean_train_seconds = s.total_train_seconds / n;
  return s;
}

namespace {

std::vector<CsiPacket> draw_packets(const SamplePoint& sp, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CsiPacket> out;
  out.reserve(static_cast<std::size_t>(p));
  const std::size_t m = sp.packets.size();
  if (static_cast<std::size_t>(p) <= m) {
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < static_cast<std::size_t>(p); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(idx[i], idx[pick(rng)]);
      out.push_back(sp.packets[idx[i]]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (int i = 0; i < p; ++i) out.push_back(sp.packets[pick(rng)]);
  }
  return out;
}

FoldResult run_fold(const FingerprintDataset& ds, const TrainConfig& cfg, const LoocvOptions& opt,
                    int held_out) {
  FoldResult f;
  const auto& test_sp = ds.sample_points[static_cast<std::size_t>(held_out)];
  f.held_out_sp = test_sp.id;
  f.truth = test_sp.position;

  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(ds.size()); ++i)
    if (i != held_out) keep.push_back(i);
  const auto train_set = select_sample_points(ds, keep);
  const auto train_positions = train_set.positions();
  f.baseline_estimate = naive_baseline(train_positions);
  f.baseline_error = localization_error(f.baseline_estimate, f.truth);

  try {
    const auto trained = train(train_set, cfg);
    f.train_seconds = trained.report.wall_seconds;
    const auto packets =
        draw_packets(test_sp, opt.packets, mix_seed(opt.seed, 0x1f01d, static_cast<std::uint64_t>(held_out)));
    const auto loc = localize(trained.model, packets, opt.candidates, opt.error_floor);
    f.estimate = loc.estimate;
    f.error = localization_error(f.estimate, f.truth);
    f.online_seconds = loc.wall_seconds;
  } catch (const Error& e) {
    f.failed = true;
    f.failure = e.what();
  }
  return f;
}

}  // namespace

LoocvResult loocv(const FingerprintDataset& ds, const TrainConfig& cfg, const LoocvOptions& opt) {
  if (ds.size() < 3)
    fail(ErrorCode::invalid_argument, "leave-one-out needs at least 3 sample points");
  if (opt.packets < 1) fail(ErrorCode::invalid_argument, "packets per localization must be >= 1");
  if (opt.candidates < 1 || static_cast<std::size_t>(opt.candidates) > ds.size() - 1)
    fail(ErrorCode::out_of_range, "candidate count must lie in [1, N-1]");
  validate_config(cfg);
  const auto issues = validate_dataset(ds);
  if (!issues.empty())
    fail(ErrorCode::invalid_argument, "dataset failed validation:\n" + format_report(issues));

  const int n = static_cast<int>(ds.size());
  LoocvResult result;
  result.folds.resize(static_cast<std::size_t>(n));

  unsigned workers = opt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++)
      result.folds[static_cast<std::size_t>(i)] = run_fold(ds, cfg, opt, i);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  result.summary = summarize(result.folds);
  return result;
}

std::vector<OnlineOverheadRow> measure_online_overhead(const FingerprintDataset& ds,
                                                       const TrainConfig& cfg,
                                                       std::span<const int> sp_subset_sizes,
                                                       const LoocvOptions& opt,
                                                       std::size_t combination_cap) {
  std::vector<OnlineOverheadRow> rows;
  for (int k : sp_subset_sizes) {
    if (k < 3 || static_cast<std::size_t>(k) > ds.size())
      fail(ErrorCode::out_of_range, "subset size " + std::to_string(k) + " outside [3, " +
                                        std::to_string(ds.size()) + "]");
    const auto combos = sample_combinations(static_cast<int>(ds.size()), k, combination_cap, opt.seed);
    OnlineOverheadRow row;
    row.sp_count = k;
    row.combinations = combos.size();
    std::size_t localizations = 0;
    for (const auto& combo : combos) {
      const auto sub = select_sample_points(ds, combo);
      const auto r = loocv(sub, cfg, opt);
      for (const auto& f : r.folds) {
        if (f.failed) continue;
        row.mean_error += f.error;
        row.mean_online_seconds += f.online_seconds;
        ++localizations;
      }
    }
    if (localizations > 0) {
      row.mean_error /= static_cast<double>(localizations);
      row.mean_online_seconds /= static_cast<double>(localizations);
    }
    // Each fold's model has k-1 labels and decodes every packet under each.
    row.mean_decodes = static_cast<double>(opt.packets) * static_cast<double>(k - 1);
    rows.push_back(row);
  }
  return rows;
}

std::string online_overhead_csv(std::span<const OnlineOverheadRow> rows) {
  std::string out = "sp_count,combinations,mean_error_m,mean_online_seconds,decodes_per_localization\n";
  for (const auto& r : rows)
    out += std::to_string(r.sp_count) + ',' + std::to_string(r.combinations) + ',' +
           format_double(r.mean_error) + ',' + format_double(r.mean_online_seconds) + ',' +
           format_double(r.mean_decodes) + '\n';
  return out;
}

std::string folds_csv(std::span<const FoldResult> folds) {
  std::string out =
      "held_out_sp,true_x,true_y,est_x,est_y,error_m,baseline_x,baseline_y,baseline_error_m,status\n";
  for (const auto& f : folds) {
    out += std::to_string(f.held_out_sp) + ',' + format_double(f.truth.x) + ',' +
           format_double(f.truth.y) + ',';
    if (f.failed) {
      out += ",,,";
    } else {
      out += format_double(f.estimate.x) + ',' + format_double(f.estimate.y) + ',' +
             format_double(f.error) + ',';
    }
    out += format_double(f.baseline_estimate.x) + ',' + format_double(f.baseline_estimate.y) +
           ',' + format_double(f.baseline_error) + ',' + (f.failed ? "failed" : "ok") + '\n';
  }
  return out;
}

std::string cdf_csv(std::span<const CdfPoint> cdf) {
  std::string out = "threshold_m,fraction\n";
  for (const auto& c : cdf) out += format_double(c.threshold) + ',' + format_double(c.fraction) + '\n';
  return out;
}

std::string timing_csv(std::span<const FoldResult> folds) {
  std::string out = "held_out_sp,train_seconds,online_seconds\n";
  for (const auto& f : folds)
    out += std::to_string(f.held_out_sp) + ',' + format_double(f.train_seconds) + ',' +
           format_double(f.online_seconds) + '\n';
  return out;
}

std::string reference_table_text() {
  return
      "Published testbed reference (physical CSI measurements; NOT comparable with synthetic results):\n"
      "  Classroom          mean / std error (m)   average execution time (s)\n"
      "    DeepPos 1.872 / 1.331                   1.1449\n"
      "    DeepFi  1.915 / 1.295                   3.7072\n"
      "  Hall and corridor\n"
      "    DeepPos 1.824 / 1.240                   1.053\n"
      "    DeepFi  1.815 / 1.287                   3.457\n"
      "  Reported for both testbeds: 80% of localization errors under about 2 m.\n";
}

std::string summary_text(const EvalSummary& s, int candidates, int packets) {
  std::ostringstream out;
  out << "Leave-one-out evaluation (R = " << candidates << ", p = " << packets << ")\n";
  out << "folds: " << s.folds << " (failed: " << s.failed_folds << ")\n";
  out << "mean error (m): " << format_double(s.mean_error) << '\n';
  out << "median error (m): " << format_double(s.median_error) << '\n';
  out << "std error (m): " << format_double(s.std_error) << '\n';
  out << "80th percentile error (m): " << format_double(s.percentile80) << '\n';
  out << "naive centroid baseline mean error (m): " << format_double(s.baseline_mean_error) << '\n';
  if (s.baseline_mean_error > 0.0)
    out << "ratio to baseline: " << format_double(s.mean_error / s.baseline_mean_error) << '\n';
  out << "mean online time per localization (s): " << s.mean_online_seconds << '\n';
  out << "total online time, all folds (s): " << s.total_online_seconds << '\n';
  out << "mean training time per fold (s): " << s.mean_train_seconds << '\n';
  out << "total training time, all folds (s): " << s.total_train_seconds << '\n';
  out << '\n' << reference_table_text();
  return out.str();
}

void write_evaluation(const std::filesystem::path& out_dir, const LoocvResult& result,
                      int candidates, int packets) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory '" + out_dir.string() + "'");
  write_file_atomic(out_dir / "folds.csv", folds_csv(result.folds));
  write_file_atomic(out_dir / "cdf.csv", cdf_csv(result.summary.cdf));
  write_file_atomic(out_dir / "timing.csv", timing_csv(result.folds));
  write_file_atomic(out_dir / "summary.txt", summary_text(result.summary, candidates, packets));
}

}  // namespace deeppos
