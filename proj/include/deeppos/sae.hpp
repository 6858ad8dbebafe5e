#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deeppos/csi_data.hpp"

namespace deeppos {

/// Sizes of the four encoder outputs, K1 > K2 > K3 > K4.
using EncoderDims = std::array<int, 4>;

struct LayerParams {
  Eigen::MatrixXd weights;  // out_dim x in_dim
  Eigen::VectorXd biases;   // out_dim

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

/// Weights of the whole network. decoder[0] consumes the bottleneck plus the
/// one-hot label (K4 + N inputs); decoder[3] emits the 90-value reconstruction.
/// Gradients and optimizer moments share this layout.
struct SaeParameters {
  std::array<LayerParams, 4> encoder;
  std::array<LayerParams, 4> decoder;

  SaeParameters zeros_like() const;
  std::size_t scalar_count() const;

  // The 16 tensors (weights, biases per layer; encoder first) as flat views.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
};

struct SpCoordinate {
  int id = 0;
  Position position;
};

struct SaeModel {
  SaeParameters params;
  int label_count = 0;
  std::vector<SpCoordinate> sp_coordinates;
  NormalizationRecord normalization;
  std::string optimizer = "rmsprop";
  std::uint64_t seed = 0;
  // Training settings recorded for provenance (learning rate, epochs, ...).
  std::map<std::string, std::string> hyperparameters;

  EncoderDims dims() const;
  Eigen::Index bottleneck_dim() const { return params.encoder[3].out_dim(); }
};

/// Activations of one pass; every entry is a sigmoid output.
struct ForwardTrace {
  std::array<Eigen::VectorXd, 5> encoder;  // u^0 (input) .. u^4
  Eigen::VectorXd latent;                  // u'^4 = (u^4, one-hot label)
  std::array<Eigen::VectorXd, 4> decoder;  // v^3, v^2, v^1, v^0
};

struct ForwardResult {
  Eigen::VectorXd output;
  ForwardTrace trace;
};

double sigmoid(double z);

void check_dims(const EncoderDims& dims);

/// Gaussian(0, init_std^2) weights, zero biases, deterministic in `seed`.
SaeModel init_model(const EncoderDims& dims, int label_count, std::uint64_t seed,
                    double init_std = 0.1);

/// Throws dimension_mismatch unless the layer chain is
/// 90 -> K1 -> K2 -> K3 -> K4 and (K4 + N) -> K3 -> K2 -> K1 -> 90.
void check_model(const SaeModel& model);

Eigen::VectorXd encode(const SaeModel& model, std::span<const double> packet,
                       ForwardTrace* trace = nullptr);

Eigen::VectorXd assemble_latent(const Eigen::VectorXd& bottleneck, int label_index,
                                int label_count);

Eigen::VectorXd decode(const SaeModel& model, const Eigen::VectorXd& latent,
                       ForwardTrace* trace = nullptr);

ForwardResult forward(const SaeModel& model, std::span<const double> packet, int label_index);

/// Squared Euclidean distance between reconstruction and measurement.
double reconstruction_loss(std::span<const double> reconstruction, std::span<const double> packet);

/// Batched forward pass. `packets` is 90 x B (one column per packet).
/// Returns the 90 x B reconstructions.
Eigen::MatrixXd forward_batch(const SaeModel& model, const Eigen::MatrixXd& packets,
                              std::span<const int> labels);

/// Adds d(sum of per-packet losses)/d(params) for a batch into `grads` and
/// returns the batch loss. The one-hot columns of decoder[0] see gradient
/// only through their weights; the label itself is an input.
double accumulate_gradients(const SaeModel& model, const Eigen::MatrixXd& packets,
                            std::span<const int> labels, SaeParameters& grads);

SaeParameters gradients(const SaeModel& model, std::span<const double> packet, int label_index);

}  // namespace deeppos
