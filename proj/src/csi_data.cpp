#include "deeppos/csi_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "deeppos/error.hpp"
#include "deeppos/io_util.hpp"

namespace deeppos {

double NormalizationRecord::apply(double raw) const {
  const double scaled = (raw - min) / (max - min);
  return std::clamp(scaled, 0.0, 1.0);
}

std::size_t FingerprintDataset::total_packets() const {
  std::size_t n = 0;
  for (const auto& sp : sample_points) n += sp.packets.size();
  return n;
}

std::vector<Position> FingerprintDataset::positions() const {
  std::vector<Position> out;
  out.reserve(sample_points.size());
  for (const auto& sp : sample_points) out.push_back(sp.position);
  return out;
}

NormalizationRecord compute_normalization(const FingerprintDataset& raw) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& sp : raw.sample_points) {
    for (const auto& pkt : sp.packets) {
      for (double a : pkt.amplitudes) {
        if (!std::isfinite(a) || a < 0.0)
          fail(ErrorCode::invalid_argument,
               "raw amplitude at sample point " + std::to_string(sp.id) +
                   " is negative or non-finite");
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
    }
  }
  if (!(hi > lo))
    fail(ErrorCode::degenerate_scale,
         "cannot normalize: all amplitudes are equal (max == min)");
  return {lo, hi};
}

FingerprintDataset normalize_dataset(FingerprintDataset raw) {
  const NormalizationRecord rec = compute_normalization(raw);
  const double span = rec.max - rec.min;
  for (auto& sp : raw.sample_points)
    for (auto& pkt : sp.packets)
      for (double& a : pkt.amplitudes) a = std::clamp((a - rec.min) / span, 0.0, 1.0);

  if (raw.normalization) {
    const auto& prev = *raw.normalization;
    const double prev_span = prev.max - prev.min;
    raw.normalization = NormalizationRecord{prev.min + rec.min * prev_span,
                                            prev.min + rec.max * prev_span};
  } else {
    raw.normalization = rec;
  }
  return raw;
}

std::vector<double> normalize_packet(std::span<const double> raw,
                                     const NormalizationRecord& rec) {
  if (!(rec.max > rec.min))
    fail(ErrorCode::degenerate_scale, "normalization record has max <= min");
  std::vector<double> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(),
                 [&](double a) { return rec.apply(a); });
  return out;
}

ValidationReport validate_dataset(const FingerprintDataset& ds) {
  ValidationReport report;
  if (ds.size() < 2)
    report.push_back({-1, -1, "dataset has fewer than 2 sample points"});

  std::set<int> ids;
  for (std::size_t s = 0; s < ds.sample_points.size(); ++s) {
    const auto& sp = ds.sample_points[s];
    const int si = static_cast<int>(s);
    if (!ids.insert(sp.id).second)
      report.push_back({si, -1, "duplicate sample point id " + std::to_string(sp.id)});
    if (!std::isfinite(sp.position.x) || !std::isfinite(sp.position.y))
      report.push_back({si, -1, "non-finite coordinates"});
    if (sp.packets.empty()) report.push_back({si, -1, "sample point has no packets"});
    for (std::size_t p = 0; p < sp.packets.size(); ++p) {
      const auto& amps = sp.packets[p].amplitudes;
      const int pi = static_cast<int>(p);
      if (amps.size() != kPacketLength) {
        report.push_back({si, pi,
                          "packet has " + std::to_string(amps.size()) +
                              " amplitudes, expected " + std::to_string(kPacketLength)});
      }
      for (std::size_t i = 0; i < amps.size(); ++i) {
        const double a = amps[i];
        if (!std::isfinite(a)) {
          report.push_back({si, pi, "amplitude " + std::to_string(i) + " is non-finite"});
          break;
        }
        if (ds.normalization && (a < 0.0 || a > 1.0)) {
          report.push_back({si, pi,
                            "amplitude " + std::to_string(i) + " = " + format_double(a) +
                                " outside [0,1] in a normalized dataset"});
          break;
        }
      }
    }
  }
  if (!ids.empty() && (*ids.begin() != 0 || *ids.rbegin() != static_cast<int>(ids.size()) - 1))
    report.push_back({-1, -1, "sample point ids are not contiguous from 0"});
  if (ds.normalization && !(ds.normalization->max > ds.normalization->min))
    report.push_back({-1, -1, "normalization record has max <= min"});
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  for (const auto& issue : report) {
    if (issue.sp_index >= 0) out << "sample point " << issue.sp_index;
    else out << "dataset";
    if (issue.packet_index >= 0) out << " packet " << issue.packet_index;
    out << ": " << issue.message << '\n';
  }
  return out.str();
}

std::filesystem::path metadata_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

static std::string header_row() {
  std::string h = "sp_id,x,y,packet_idx";
  for (std::size_t i = 0; i < kPacketLength; ++i) h += ",a" + std::to_string(i);
  return h;
}

std::string dataset_to_csv(const FingerprintDataset& ds) {
  std::string out = header_row();
  out += '\n';
  for (const auto& sp : ds.sample_points) {
    const std::string prefix = std::to_string(sp.id) + ',' + format_double(sp.position.x) +
                               ',' + format_double(sp.position.y) + ',';
    for (std::size_t p = 0; p < sp.packets.size(); ++p) {
      out += prefix;
      out += std::to_string(p);
      for (double a : sp.packets[p].amplitudes) {
        out += ',';
        out += format_double(a);
      }
      out += '\n';
    }
  }
  return out;
}

static std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cols;
}

FingerprintDataset dataset_from_csv(const std::string& text, const std::string& source_name) {
  auto parse_error = [&](std::size_t line, const std::string& what) -> Error {
    return Error(ErrorCode::parse, source_name + ":" + std::to_string(line) + ": " + what);
  };

  std::map<int, SamplePoint> by_id;
  std::set<std::pair<int, long long>> seen_packets;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  const std::string expected_header = header_row();
  constexpr std::size_t kColumns = 4 + kPacketLength;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line != expected_header)
        throw parse_error(line_no, "missing or malformed header row");
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto cols = split_commas(line);
    if (cols.size() != kColumns)
      throw parse_error(line_no, "expected " + std::to_string(kColumns) + " columns, found " +
                                     std::to_string(cols.size()));
    long long id = 0;
    long long packet_idx = 0;
    double x = 0.0;
    double y = 0.0;
    if (!parse_int(cols[0], id) || id < 0 || id > std::numeric_limits<int>::max())
      throw parse_error(line_no, "sp_id must be a non-negative integer");
    if (!parse_double(cols[1], x) || !parse_double(cols[2], y) || !std::isfinite(x) ||
        !std::isfinite(y))
      throw parse_error(line_no, "malformed coordinates");
    if (!parse_int(cols[3], packet_idx) || packet_idx < 0)
      throw parse_error(line_no, "packet_idx must be a non-negative integer");
    if (!seen_packets.insert({static_cast<int>(id), packet_idx}).second)
      throw parse_error(line_no, "duplicate (sp_id, packet_idx) = (" + std::to_string(id) +
                                     ", " + std::to_string(packet_idx) + ")");

    CsiPacket pkt;
    pkt.amplitudes.resize(kPacketLength);
    for (std::size_t i = 0; i < kPacketLength; ++i) {
      if (!parse_double(cols[4 + i], pkt.amplitudes[i]) || !std::isfinite(pkt.amplitudes[i]))
        throw parse_error(line_no, "malformed amplitude a" + std::to_string(i));
    }

    auto [it, inserted] = by_id.try_emplace(static_cast<int>(id));
    SamplePoint& sp = it->second;
    if (inserted) {
      sp.id = static_cast<int>(id);
      sp.position = {x, y};
    } else if (sp.position.x != x || sp.position.y != y) {
      throw parse_error(line_no, "coordinates differ from earlier rows of sp_id " +
                                     std::to_string(id));
    }
    sp.packets.push_back(std::move(pkt));
  }
  if (!have_header) throw parse_error(1, "missing header row");

  FingerprintDataset ds;
  int expected = 0;
  for (auto& [id, sp] : by_id) {
    if (id != expected)
      fail(ErrorCode::parse, source_name + ": sp_id values are not contiguous from 0 (missing " +
                                 std::to_string(expected) + ")");
    ds.sample_points.push_back(std::move(sp));
    ++expected;
  }
  return ds;
}

std::string metadata_to_json(const DatasetMetadata& meta) {
  nlohmann::ordered_json j;
  j["format"] = "deeppos-dataset-meta";
  j["version"] = 1;
  if (meta.normalization) {
    j["normalized"] = true;
    j["normalization"] = {{"min", meta.normalization->min}, {"max", meta.normalization->max}};
  } else {
    j["normalized"] = false;
  }
  nlohmann::ordered_json prov = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.provenance) prov[k] = v;
  j["provenance"] = prov;
  return j.dump(2) + "\n";
}

DatasetMetadata read_metadata(const std::filesystem::path& path) {
  DatasetMetadata meta;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
    if (j.value("normalized", false)) {
      const auto& n = j.at("normalization");
      meta.normalization = NormalizationRecord{n.at("min").get<double>(), n.at("max").get<double>()};
    }
    if (j.contains("provenance"))
      for (const auto& [k, v] : j["provenance"].items())
        meta.provenance[k] = v.is_string() ? v.get<std::string>() : v.dump();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, path.string() + ": " + e.what());
  }
  return meta;
}

FingerprintDataset load_dataset(const std::filesystem::path& path) {
  FingerprintDataset ds = dataset_from_csv(read_text_file(path), path.string());
  const auto meta_path = metadata_path_for(path);
  if (std::filesystem::exists(meta_path)) ds.normalization = read_metadata(meta_path).normalization;
  return ds;
}

void write_dataset(const FingerprintDataset& ds, const std::filesystem::path& path,
                   const std::map<std::string, std::string>& provenance) {
  write_file_atomic(path, dataset_to_csv(ds));
  write_file_atomic(metadata_path_for(path), metadata_to_json({ds.normalization, provenance}));
}

FingerprintDataset select_sample_points(const FingerprintDataset& ds, std::span<const int> ids) {
  FingerprintDataset out;
  out.normalization = ds.normalization;
  out.sample_points.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= ds.size())
      fail(ErrorCode::out_of_range, "sample point " + std::to_string(id) + " does not exist");
    SamplePoint sp = ds.sample_points[static_cast<std::size_t>(id)];
    sp.id = static_cast<int>(out.sample_points.size());
    out.sample_points.push_back(std::move(sp));
  }
  return out;
}

}  // namespace deeppos
