#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "deeppos/csi_data.hpp"

namespace deeppos {

inline constexpr double kSpeedOfLight = 299792458.0;

struct WallSegment {
  Position a;
  Position b;
};

struct AntennaOffset {
  double gain = 1.0;
  double phase = 0.0;  // radians
};

/// Floor plan and propagation parameters for the geometric multipath model.
///
/// Each receive antenna sees every path scaled by its fixed gain/phase offset
/// and, when `antenna_directivity` > 0, by a cardioid-like pattern
/// 1 + directivity * cos(arrival_angle - boresight). Boresights are spread
/// 120 degrees apart starting at `antenna_boresight0`. Directivity 0 gives
/// isotropic antennas.
struct EnvironmentSpec {
  double width = 6.0;
  double height = 7.0;
  Position ap_position{3.0, 0.25};
  double carrier_frequency = 2.4e9;
  double subcarrier_spacing = 625e3;
  double path_loss_exponent = 2.0;
  std::vector<Position> scatterer_positions;
  double reflection_magnitude = 0.6;
  double noise_std = 0.0;
  std::array<AntennaOffset, kAntennaCount> antenna_offsets{};
  double antenna_directivity = 0.0;
  double antenna_boresight0 = 1.5707963267948966;
  std::vector<WallSegment> walls;
  std::uint64_t rng_seed = 7;

  std::size_t path_count() const { return 1 + scatterer_positions.size(); }
};

/// Grid placement used by generate_dataset.
struct GridSettings {
  double spacing = 1.0;
  int packets_per_sp = 30;
  // Negative means spacing / 2.
  double offset = -1.0;
  double ap_exclusion_radius = 0.5;
};

/// Per-antenna, per-subcarrier complex gains.
struct ChannelResponse {
  std::array<std::array<std::complex<double>, kSubcarrierCount>, kAntennaCount> gains{};

  std::vector<double> magnitudes() const;  // antenna-major, length 90
};

void validate_environment(const EnvironmentSpec& env);

double subcarrier_frequency(const EnvironmentSpec& env, std::size_t subcarrier);

/// Seeded unit-magnitude phase of each scatterer's reflection coefficient.
std::vector<double> reflection_phases(const EnvironmentSpec& env);

/// True when some wall segment crosses the straight AP-to-position segment.
bool line_of_sight_blocked(const EnvironmentSpec& env, Position position);

ChannelResponse channel_response(const EnvironmentSpec& env, Position position);

/// Raw (pre-normalization) amplitudes: |H| plus Gaussian noise, floored at 0.
CsiPacket sample_packet(const EnvironmentSpec& env, Position position, std::mt19937_64& rng);

std::vector<Position> grid_positions(const EnvironmentSpec& env, const GridSettings& grid);

/// Uniform grid survey, normalized. Packet (sp, k) draws its noise from a
/// stream seeded by (rng_seed, sp, k), independent of generation order.
FingerprintDataset generate_dataset(const EnvironmentSpec& env, const GridSettings& grid);

}  // namespace deeppos
