#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "deeppos/csi_data.hpp"

namespace deeppos::test {

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("deeppos_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline FingerprintDataset random_dataset(int n, int m, std::uint64_t seed, double lo = 0.0,
                                         double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  FingerprintDataset ds;
  for (int j = 0; j < n; ++j) {
    SamplePoint sp;
    sp.id = j;
    sp.position = {static_cast<double>(j), 0.5 * j};
    for (int l = 0; l < m; ++l) {
      CsiPacket p;
      p.amplitudes.resize(kPacketLength);
      for (double& a : p.amplitudes) a = u(rng);
      sp.packets.push_back(p);
    }
    ds.sample_points.push_back(sp);
  }
  return ds;
}

}  // namespace deeppos::test
