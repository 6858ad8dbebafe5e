#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deeppos {

inline constexpr std::size_t kAntennaCount = 3;
inline constexpr std::size_t kSubcarrierCount = 30;
inline constexpr std::size_t kPacketLength = kAntennaCount * kSubcarrierCount;

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

/// One CSI measurement: subcarrier amplitudes flattened antenna-major
/// (index = antenna * 30 + subcarrier).
struct CsiPacket {
  std::vector<double> amplitudes;

  friend bool operator==(const CsiPacket&, const CsiPacket&) = default;
};

struct SamplePoint {
  int id = 0;
  Position position;
  std::vector<CsiPacket> packets;

  friend bool operator==(const SamplePoint&, const SamplePoint&) = default;
};

/// Global min/max scaling shared by a training set and every packet later
/// scored against a model trained on it.
struct NormalizationRecord {
  double min = 0.0;
  double max = 1.0;

  /// Maps a raw amplitude into [0,1]; values outside the recorded range clamp.
  double apply(double raw) const;

  friend bool operator==(const NormalizationRecord&, const NormalizationRecord&) = default;
};

struct FingerprintDataset {
  std::vector<SamplePoint> sample_points;
  // Present once the amplitudes have been scaled into [0,1].
  std::optional<NormalizationRecord> normalization;

  std::size_t size() const { return sample_points.size(); }
  std::size_t total_packets() const;
  std::vector<Position> positions() const;

  friend bool operator==(const FingerprintDataset&, const FingerprintDataset&) = default;
};

NormalizationRecord compute_normalization(const FingerprintDataset& raw);

/// Min-max scales every amplitude with one global (min, max). On a dataset
/// that already carries a record the new scaling is composed into it, so the
/// stored record always maps original raw units to the stored values.
FingerprintDataset normalize_dataset(FingerprintDataset raw);

std::vector<double> normalize_packet(std::span<const double> raw, const NormalizationRecord& rec);

struct ValidationIssue {
  int sp_index = -1;
  int packet_index = -1;  // -1 for sample-point or dataset level issues
  std::string message;
};

using ValidationReport = std::vector<ValidationIssue>;

/// Checks packet length, id contiguity, N >= 2, m >= 1 and, for datasets that
/// claim normalization, the [0,1] amplitude range.
ValidationReport validate_dataset(const FingerprintDataset& ds);

std::string format_report(const ValidationReport& report);

/// Sidecar next to a dataset CSV: "<stem>.meta.json".
std::filesystem::path metadata_path_for(const std::filesystem::path& csv_path);

struct DatasetMetadata {
  std::optional<NormalizationRecord> normalization;
  std::map<std::string, std::string> provenance;
};

/// Parses the dataset CSV and, when a sidecar exists, its normalization record.
FingerprintDataset load_dataset(const std::filesystem::path& path);

/// Writes the CSV and its sidecar atomically.
void write_dataset(const FingerprintDataset& ds, const std::filesystem::path& path,
                   const std::map<std::string, std::string>& provenance = {});

std::string dataset_to_csv(const FingerprintDataset& ds);
FingerprintDataset dataset_from_csv(const std::string& text, const std::string& source_name);

DatasetMetadata read_metadata(const std::filesystem::path& path);
std::string metadata_to_json(const DatasetMetadata& meta);

/// Picks the sample points listed in `ids` (in that order) and re-labels them
/// 0..k-1. Normalization is carried over unchanged.
FingerprintDataset select_sample_points(const FingerprintDataset& ds, std::span<const int> ids);

}  // namespace deeppos
