#include "deeppos/localizer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include <json.hpp>

#include "deeppos/error.hpp"

namespace deeppos {

std::vector<double> label_reconstruction_errors(const SaeModel& model,
                                                std::span<const CsiPacket> packets,
                                                LocalizerCounters* counters) {
  if (packets.empty()) fail(ErrorCode::invalid_argument, "localization needs at least one packet");
  const auto p = static_cast<Eigen::Index>(packets.size());
  Eigen::MatrixXd measured(static_cast<Eigen::Index>(kPacketLength), p);
  for (Eigen::Index l = 0; l < p; ++l) {
    const auto& amps = packets[static_cast<std::size_t>(l)].amplitudes;
    if (amps.size() != kPacketLength)
      fail(ErrorCode::dimension_mismatch, "packet " + std::to_string(l) + " has " +
                                              std::to_string(amps.size()) + " values, expected " +
                                              std::to_string(kPacketLength));
    measured.col(l) = Eigen::Map<const Eigen::VectorXd>(amps.data(), static_cast<Eigen::Index>(kPacketLength));
  }

  Eigen::MatrixXd bottleneck(model.bottleneck_dim(), p);
  for (Eigen::Index l = 0; l < p; ++l) {
    const auto& amps = packets[static_cast<std::size_t>(l)].amplitudes;
    bottleneck.col(l) = encode(model, amps);
  }
  if (counters) counters->encodes += static_cast<std::size_t>(p);

  const int n = model.label_count;
  std::vector<double> errors(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double sum = 0.0;
    for (Eigen::Index l = 0; l < p; ++l) {
      const Eigen::VectorXd v0 = decode(model, assemble_latent(bottleneck.col(l), j, n));
      sum += (v0 - measured.col(l)).squaredNorm();
    }
    if (counters) counters->decodes += static_cast<std::size_t>(p);
    errors[static_cast<std::size_t>(j)] = sum / static_cast<double>(p);
  }
  return errors;
}

std::vector<Candidate> select_candidates(std::span<const double> errors, int count) {
  if (count < 1 || static_cast<std::size_t>(count) > errors.size())
    fail(ErrorCode::out_of_range, "candidate count " + std::to_string(count) + " outside [1, " +
                                      std::to_string(errors.size()) + "]");
  std::vector<int> idx(errors.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return errors[static_cast<std::size_t>(a)] < errors[static_cast<std::size_t>(b)];
  });
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r)
    out.push_back({idx[static_cast<std::size_t>(r)], errors[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])]});
  return out;
}

Position estimate_position(std::span<const Candidate> candidates,
                           std::span<const Position> sp_coordinates, double error_floor) {
  if (candidates.empty()) fail(ErrorCode::invalid_argument, "no candidates to average");
  if (!(error_floor > 0.0)) fail(ErrorCode::invalid_argument, "error floor must be positive");
  double wsum = 0.0;
  double x = 0.0;
  double y = 0.0;
  for (const auto& c : candidates) {
    if (c.label < 0 || static_cast<std::size_t>(c.label) >= sp_coordinates.size())
      fail(ErrorCode::out_of_range, "candidate label " + std::to_string(c.label) +
                                        " has no coordinates");
    const double w = 1.0 / std::max(c.error, error_floor);
    const Position& pos = sp_coordinates[static_cast<std::size_t>(c.label)];
    wsum += w;
    x += w * pos.x;
    y += w * pos.y;
  }
  return {x / wsum, y / wsum};
}

std::vector<Position> model_positions(const SaeModel& model) {
  std::vector<Position> out;
  out.reserve(model.sp_coordinates.size());
  for (const auto& c : model.sp_coordinates) out.push_back(c.position);
  return out;
}

LocalizationResult localize(const SaeModel& model, std::span<const CsiPacket> packets,
                            int candidate_count, double error_floor,
                            LocalizerCounters* counters) {
  const auto t0 = std::chrono::steady_clock::now();
  LocalizationResult r;
  r.per_label_errors = label_reconstruction_errors(model, packets, counters);
  r.candidates = select_candidates(r.per_label_errors, candidate_count);
  const auto coords = model_positions(model);
  r.estimate = estimate_position(r.candidates, coords, error_floor);
  r.packets_used = static_cast<int>(packets.size());
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string LocalizationResult::to_json() const {
  nlohmann::ordered_json j;
  j["estimate"] = {{"x", estimate.x}, {"y", estimate.y}};
  j["packets_used"] = packets_used;
  nlohmann::ordered_json cands = nlohmann::ordered_json::array();
  for (const auto& c : candidates) cands.push_back({{"label", c.label}, {"error", c.error}});
  j["candidates"] = cands;
  j["per_label_errors"] = per_label_errors;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2) + "\n";
}

}  // namespace deeppos
