#include "deeppos/synthetic_env.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "deeppos/error.hpp"
#include "deeppos/io_util.hpp"

namespace deeppos {

namespace {

constexpr double kCoincidence = 1e-9;

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool inside(const EnvironmentSpec& env, Position p) {
  return p.x >= 0.0 && p.x <= env.width && p.y >= 0.0 && p.y <= env.height;
}

double cross(Position o, Position a, Position b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_intersect(Position p1, Position p2, Position q1, Position q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 &&
         d3 != 0 && d4 != 0;
}

}  // namespace

std::vector<double> ChannelResponse::magnitudes() const {
  std::vector<double> out;
  out.reserve(kPacketLength);
  for (const auto& antenna : gains)
    for (const auto& h : antenna) out.push_back(std::abs(h));
  return out;
}

void validate_environment(const EnvironmentSpec& env) {
  if (!(env.width > 0.0) || !(env.height > 0.0))
    fail(ErrorCode::invalid_argument, "floor plan width and height must be positive");
  if (!inside(env, env.ap_position))
    fail(ErrorCode::invalid_argument, "access point lies outside the floor plan");
  if (!(env.carrier_frequency > 0.0) || !(env.subcarrier_spacing >= 0.0))
    fail(ErrorCode::invalid_argument, "carrier frequency must be positive");
  if (!(env.noise_std >= 0.0)) fail(ErrorCode::invalid_argument, "noise_std must be >= 0");
  if (!(env.path_loss_exponent >= 0.0))
    fail(ErrorCode::invalid_argument, "path loss exponent must be >= 0");
  if (!(env.antenna_directivity >= 0.0) || env.antenna_directivity > 1.0)
    fail(ErrorCode::invalid_argument, "antenna directivity must lie in [0,1]");
  for (const auto& s : env.scatterer_positions)
    if (distance(s, env.ap_position) < kCoincidence)
      fail(ErrorCode::singular_geometry, "scatterer coincides with the access point");
}

double subcarrier_frequency(const EnvironmentSpec& env, std::size_t subcarrier) {
  return env.carrier_frequency +
         (static_cast<double>(subcarrier) - 15.0) * env.subcarrier_spacing;
}

std::vector<double> reflection_phases(const EnvironmentSpec& env) {
  std::mt19937_64 rng(mix_seed(env.rng_seed, 0x5ca7));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<double> out(env.scatterer_positions.size());
  for (double& p : out) p = phase(rng);
  return out;
}

bool line_of_sight_blocked(const EnvironmentSpec& env, Position position) {
  for (const auto& w : env.walls)
    if (segments_intersect(env.ap_position, position, w.a, w.b)) return true;
  return false;
}

ChannelResponse channel_response(const EnvironmentSpec& env, Position position) {
  validate_environment(env);
  if (!inside(env, position))
    fail(ErrorCode::invalid_argument, "position lies outside the floor plan");
  if (distance(position, env.ap_position) < kCoincidence)
    fail(ErrorCode::singular_geometry, "position coincides with the access point");
  for (const auto& s : env.scatterer_positions)
    if (distance(position, s) < kCoincidence)
      fail(ErrorCode::singular_geometry, "position coincides with a scatterer");

  struct Path {
    double length;
    std::complex<double> coefficient;
    double arrival_angle;
  };
  std::vector<Path> paths;
  paths.reserve(env.path_count());
  if (!line_of_sight_blocked(env, position)) {
    paths.push_back({distance(env.ap_position, position), 1.0,
                     std::atan2(position.y - env.ap_position.y, position.x - env.ap_position.x)});
  }
  const auto phases = reflection_phases(env);
  for (std::size_t k = 0; k < env.scatterer_positions.size(); ++k) {
    const Position s = env.scatterer_positions[k];
    paths.push_back({distance(env.ap_position, s) + distance(s, position),
                     std::polar(env.reflection_magnitude, phases[k]),
                     std::atan2(s.y - env.ap_position.y, s.x - env.ap_position.x)});
  }

  ChannelResponse h;
  const double half_exponent = env.path_loss_exponent / 2.0;
  for (std::size_t a = 0; a < kAntennaCount; ++a) {
    const auto& off = env.antenna_offsets[a];
    const std::complex<double> antenna_term = std::polar(off.gain, off.phase);
    const double boresight =
        env.antenna_boresight0 + 2.0 * std::numbers::pi * static_cast<double>(a) / 3.0;
    for (std::size_t i = 0; i < kSubcarrierCount; ++i) {
      const double f = subcarrier_frequency(env, i);
      std::complex<double> sum = 0.0;
      for (const auto& p : paths) {
        const double pattern = 1.0 + env.antenna_directivity * std::cos(p.arrival_angle - boresight);
        const double delay = p.length / kSpeedOfLight;
        sum += antenna_term * pattern * p.coefficient * std::pow(p.length, -half_exponent) *
               std::polar(1.0, -2.0 * std::numbers::pi * f * delay);
      }
      h.gains[a][i] = sum;
    }
  }
  return h;
}

CsiPacket sample_packet(const EnvironmentSpec& env, Position position, std::mt19937_64& rng) {
  CsiPacket pkt{channel_response(env, position).magnitudes()};
  if (env.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, env.noise_std);
    for (double& a : pkt.amplitudes) a = std::max(0.0, a + noise(rng));
  }
  return pkt;
}

std::vector<Position> grid_positions(const EnvironmentSpec& env, const GridSettings& grid) {
  if (!(grid.spacing > 0.0)) fail(ErrorCode::invalid_argument, "grid spacing must be positive");
  const double offset = grid.offset < 0.0 ? grid.spacing / 2.0 : grid.offset;
  std::vector<Position> out;
  // Index-based stepping keeps coordinates exact multiples of the spacing.
  for (int row = 0;; ++row) {
    const double y = offset + row * grid.spacing;
    if (y > env.height) break;
    for (int col = 0;; ++col) {
      const double x = offset + col * grid.spacing;
      if (x > env.width) break;
      const Position p{x, y};
      if (distance(p, env.ap_position) <= grid.ap_exclusion_radius) continue;
      bool on_scatterer = false;
      for (const auto& s : env.scatterer_positions)
        on_scatterer = on_scatterer || distance(p, s) < kCoincidence;
      if (!on_scatterer) out.push_back(p);
    }
  }
  return out;
}

FingerprintDataset generate_dataset(const EnvironmentSpec& env, const GridSettings& grid) {
  validate_environment(env);
  if (grid.packets_per_sp < 1)
    fail(ErrorCode::invalid_argument, "packets per sample point must be >= 1");
  const auto points = grid_positions(env, grid);
  if (points.size() < 2)
    fail(ErrorCode::invalid_argument,
         "grid too coarse: only " + std::to_string(points.size()) + " sample point(s)");

  FingerprintDataset raw;
  raw.sample_points.reserve(points.size());
  for (std::size_t s = 0; s < points.size(); ++s) {
    SamplePoint sp;
    sp.id = static_cast<int>(s);
    sp.position = points[s];
    const auto clean = channel_response(env, sp.position).magnitudes();
    sp.packets.reserve(static_cast<std::size_t>(grid.packets_per_sp));
    for (int k = 0; k < grid.packets_per_sp; ++k) {
      std::mt19937_64 rng(mix_seed(env.rng_seed, s + 1, static_cast<std::uint64_t>(k)));
      std::normal_distribution<double> noise(0.0, env.noise_std);
      CsiPacket pkt{clean};
      if (env.noise_std > 0.0)
        for (double& a : pkt.amplitudes) a = std::max(0.0, a + noise(rng));
      sp.packets.push_back(std::move(pkt));
    }
    raw.sample_points.push_back(std::move(sp));
  }
  return normalize_dataset(std::move(raw));
}

}  // namespace deeppos
