#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "deeppos/csi_data.hpp"
#include "deeppos/sae.hpp"

namespace deeppos {

inline constexpr double kDefaultErrorFloor = 1e-9;

struct Candidate {
  int label = 0;
  double error = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct LocalizationResult {
  std::vector<double> per_label_errors;
  std::vector<Candidate> candidates;
  Position estimate;
  int packets_used = 0;
  double wall_seconds = 0.0;

  std::string to_json() const;
};

/// Optional instrumentation: how many packets were encoded and how many
/// (packet, label) reconstructions were decoded.
struct LocalizerCounters {
  std::size_t encodes = 0;
  std::size_t decodes = 0;
};

/// Mean squared reconstruction error of the packets under each label.
/// Each packet is encoded once; every label then reuses that bottleneck.
/// Packets must already be normalized with the model's record.
std::vector<double> label_reconstruction_errors(const SaeModel& model,
                                                std::span<const CsiPacket> packets,
                                                LocalizerCounters* counters = nullptr);

/// The R smallest errors ascending; equal errors resolve to the lower label.
std::vector<Candidate> select_candidates(std::span<const double> errors, int count);

/// Inverse-error weighted mean of candidate coordinates, weights
/// 1 / max(error, floor), normalized to sum to one.
Position estimate_position(std::span<const Candidate> candidates,
                           std::span<const Position> sp_coordinates,
                           double error_floor = kDefaultErrorFloor);

LocalizationResult localize(const SaeModel& model, std::span<const CsiPacket> packets,
                            int candidate_count, double error_floor = kDefaultErrorFloor,
                            LocalizerCounters* counters = nullptr);

std::vector<Position> model_positions(const SaeModel& model);

}  // namespace deeppos
