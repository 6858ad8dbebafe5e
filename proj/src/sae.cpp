#include "deeppos/sae.hpp"

#include <cmath>
#include <random>

#include "deeppos/error.hpp"

namespace deeppos {

namespace {

Eigen::MatrixXd sigmoid_of(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

// z = W x + b for each column of x.
Eigen::MatrixXd affine(const LayerParams& layer, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(layer.out_dim(), x.cols());
  z.noalias() = layer.weights * x;
  z.colwise() += layer.biases;
  return z;
}

Eigen::MatrixXd latent_batch(const Eigen::MatrixXd& bottleneck, std::span<const int> labels,
                             int label_count) {
  const Eigen::Index k4 = bottleneck.rows();
  Eigen::MatrixXd latent = Eigen::MatrixXd::Zero(k4 + label_count, bottleneck.cols());
  latent.topRows(k4) = bottleneck;
  for (Eigen::Index c = 0; c < bottleneck.cols(); ++c) {
    const int label = labels[static_cast<std::size_t>(c)];
    if (label < 0 || label >= label_count)
      fail(ErrorCode::out_of_range, "label index " + std::to_string(label) +
                                        " outside [0, " + std::to_string(label_count) + ")");
    latent(k4 + label, c) = 1.0;
  }
  return latent;
}

void check_packet(std::span<const double> packet) {
  if (packet.size() != kPacketLength)
    fail(ErrorCode::dimension_mismatch, "packet has " + std::to_string(packet.size()) +
                                            " values, model expects " +
                                            std::to_string(kPacketLength));
}

Eigen::MatrixXd as_column(std::span<const double> packet) {
  return Eigen::Map<const Eigen::VectorXd>(packet.data(), static_cast<Eigen::Index>(packet.size()));
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

SaeParameters SaeParameters::zeros_like() const {
  SaeParameters out;
  auto zero = [](const LayerParams& l) {
    return LayerParams{Eigen::MatrixXd::Zero(l.out_dim(), l.in_dim()),
                       Eigen::VectorXd::Zero(l.out_dim())};
  };
  for (std::size_t i = 0; i < 4; ++i) {
    out.encoder[i] = zero(encoder[i]);
    out.decoder[i] = zero(decoder[i]);
  }
  return out;
}

std::size_t SaeParameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.size();
  return n;
}

std::vector<std::span<double>> SaeParameters::tensors() {
  std::vector<std::span<double>> out;
  out.reserve(16);
  for (auto* group : {&encoder, &decoder}) {
    for (auto& l : *group) {
      out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
      out.emplace_back(l.biases.data(), static_cast<std::size_t>(l.biases.size()));
    }
  }
  return out;
}

std::vector<std::span<const double>> SaeParameters::tensors() const {
  std::vector<std::span<const double>> out;
  out.reserve(16);
  for (const auto* group : {&encoder, &decoder}) {
    for (const auto& l : *group) {
      out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
      out.emplace_back(l.biases.data(), static_cast<std::size_t>(l.biases.size()));
    }
  }
  return out;
}

EncoderDims SaeModel::dims() const {
  EncoderDims d{};
  for (std::size_t i = 0; i < 4; ++i) d[i] = static_cast<int>(params.encoder[i].out_dim());
  return d;
}

void check_dims(const EncoderDims& dims) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (dims[i] < 1) fail(ErrorCode::invalid_argument, "layer sizes must be positive");
    if (i > 0 && dims[i] >= dims[i - 1])
      fail(ErrorCode::invalid_argument,
           "layer sizes must be strictly decreasing (K1 > K2 > K3 > K4)");
  }
}

SaeModel init_model(const EncoderDims& dims, int label_count, std::uint64_t seed,
                    double init_std) {
  check_dims(dims);
  if (label_count < 2) fail(ErrorCode::invalid_argument, "label count must be >= 2");
  if (!(init_std > 0.0)) fail(ErrorCode::invalid_argument, "init scale must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  auto make = [&](int out, int in) {
    LayerParams l{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    // Fill row-major so the draw order matches the serialized order.
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) l.weights(r, c) = normal(rng);
    return l;
  };

  SaeModel m;
  m.label_count = label_count;
  m.seed = seed;
  const int input = static_cast<int>(kPacketLength);
  m.params.encoder[0] = make(dims[0], input);
  m.params.encoder[1] = make(dims[1], dims[0]);
  m.params.encoder[2] = make(dims[2], dims[1]);
  m.params.encoder[3] = make(dims[3], dims[2]);
  m.params.decoder[0] = make(dims[2], dims[3] + label_count);
  m.params.decoder[1] = make(dims[1], dims[2]);
  m.params.decoder[2] = make(dims[0], dims[1]);
  m.params.decoder[3] = make(input, dims[0]);
  m.sp_coordinates.resize(static_cast<std::size_t>(label_count));
  for (int j = 0; j < label_count; ++j) m.sp_coordinates[static_cast<std::size_t>(j)].id = j;
  return m;
}

void check_model(const SaeModel& model) {
  const auto& p = model.params;
  auto expect = [](const LayerParams& l, Eigen::Index out, Eigen::Index in, const char* name) {
    if (l.out_dim() != out || l.in_dim() != in || l.biases.size() != out)
      fail(ErrorCode::dimension_mismatch,
           std::string(name) + " is " + std::to_string(l.out_dim()) + "x" +
               std::to_string(l.in_dim()) + ", expected " + std::to_string(out) + "x" +
               std::to_string(in));
  };
  const auto d = model.dims();
  check_dims(d);
  if (model.label_count < 2) fail(ErrorCode::invalid_argument, "label count must be >= 2");
  const Eigen::Index input = static_cast<Eigen::Index>(kPacketLength);
  expect(p.encoder[0], d[0], input, "encoder layer 1");
  expect(p.encoder[1], d[1], d[0], "encoder layer 2");
  expect(p.encoder[2], d[2], d[1], "encoder layer 3");
  expect(p.encoder[3], d[3], d[2], "encoder layer 4");
  expect(p.decoder[0], d[2], d[3] + model.label_count, "decoder layer 4");
  expect(p.decoder[1], d[1], d[2], "decoder layer 3");
  expect(p.decoder[2], d[0], d[1], "decoder layer 2");
  expect(p.decoder[3], input, d[0], "decoder layer 1");
  if (model.sp_coordinates.size() != static_cast<std::size_t>(model.label_count))
    fail(ErrorCode::dimension_mismatch, "coordinate table size differs from label count");
}

Eigen::VectorXd encode(const SaeModel& model, std::span<const double> packet,
                       ForwardTrace* trace) {
  check_packet(packet);
  Eigen::VectorXd u = as_column(packet);
  if (trace) trace->encoder[0] = u;
  for (std::size_t i = 0; i < 4; ++i) {
    u = sigmoid_of(affine(model.params.encoder[i], u));
    if (trace) trace->encoder[i + 1] = u;
  }
  return u;
}

Eigen::VectorXd assemble_latent(const Eigen::VectorXd& bottleneck, int label_index,
                                int label_count) {
  if (label_count < 1 || label_index < 0 || label_index >= label_count)
    fail(ErrorCode::out_of_range, "label index " + std::to_string(label_index) +
                                      " outside [0, " + std::to_string(label_count) + ")");
  Eigen::VectorXd latent = Eigen::VectorXd::Zero(bottleneck.size() + label_count);
  latent.head(bottleneck.size()) = bottleneck;
  latent(bottleneck.size() + label_index) = 1.0;
  return latent;
}

Eigen::VectorXd decode(const SaeModel& model, const Eigen::VectorXd& latent,
                       ForwardTrace* trace) {
  if (latent.size() != model.params.decoder[0].in_dim())
    fail(ErrorCode::dimension_mismatch,
         "latent vector has length " + std::to_string(latent.size()) + ", decoder expects " +
             std::to_string(model.params.decoder[0].in_dim()));
  if (trace) trace->latent = latent;
  Eigen::VectorXd v = latent;
  for (std::size_t i = 0; i < 4; ++i) {
    v = sigmoid_of(affine(model.params.decoder[i], v));
    if (trace) trace->decoder[i] = v;
  }
  return v;
}

ForwardResult forward(const SaeModel& model, std::span<const double> packet, int label_index) {
  ForwardResult r;
  const Eigen::VectorXd u4 = encode(model, packet, &r.trace);
  r.output = decode(model, assemble_latent(u4, label_index, model.label_count), &r.trace);
  return r;
}

double reconstruction_loss(std::span<const double> reconstruction,
                           std::span<const double> packet) {
  if (reconstruction.size() != packet.size())
    fail(ErrorCode::dimension_mismatch, "reconstruction and packet lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < packet.size(); ++i) {
    const double d = reconstruction[i] - packet[i];
    sum += d * d;
  }
  return sum;
}

Eigen::MatrixXd forward_batch(const SaeModel& model, const Eigen::MatrixXd& packets,
                              std::span<const int> labels) {
  if (packets.rows() != static_cast<Eigen::Index>(kPacketLength) ||
      static_cast<std::size_t>(packets.cols()) != labels.size())
    fail(ErrorCode::dimension_mismatch, "batch shape does not match labels or packet length");
  Eigen::MatrixXd a = packets;
  for (const auto& layer : model.params.encoder) a = sigmoid_of(affine(layer, a));
  a = latent_batch(a, labels, model.label_count);
  for (const auto& layer : model.params.decoder) a = sigmoid_of(affine(layer, a));
  return a;
}

double accumulate_gradients(const SaeModel& model, const Eigen::MatrixXd& packets,
                            std::span<const int> labels, SaeParameters& grads) {
  if (packets.rows() != static_cast<Eigen::Index>(kPacketLength) ||
      static_cast<std::size_t>(packets.cols()) != labels.size())
    fail(ErrorCode::dimension_mismatch, "batch shape does not match labels or packet length");
  const auto& p = model.params;

  std::array<Eigen::MatrixXd, 5> enc;  // enc[0] = input, enc[4] = bottleneck
  enc[0] = packets;
  for (std::size_t i = 0; i < 4; ++i) enc[i + 1] = sigmoid_of(affine(p.encoder[i], enc[i]));

  std::array<Eigen::MatrixXd, 5> dec;  // dec[0] = latent, dec[4] = reconstruction
  dec[0] = latent_batch(enc[4], labels, model.label_count);
  for (std::size_t i = 0; i < 4; ++i) dec[i + 1] = sigmoid_of(affine(p.decoder[i], dec[i]));

  const Eigen::MatrixXd residual = dec[4] - packets;
  const double loss = residual.squaredNorm();

  // d loss / d (layer output), propagated backwards.
  Eigen::MatrixXd upstream = 2.0 * residual;
  for (std::size_t i = 4; i-- > 0;) {
    const Eigen::MatrixXd& out = dec[i + 1];
    const Eigen::MatrixXd delta =
        upstream.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix()));
    grads.decoder[i].weights.noalias() += delta * dec[i].transpose();
    grads.decoder[i].biases += delta.rowwise().sum();
    if (i > 0) {
      upstream.noalias() = p.decoder[i].weights.transpose() * delta;
    } else {
      const Eigen::Index k4 = enc[4].rows();
      upstream.noalias() = p.decoder[0].weights.leftCols(k4).transpose() * delta;
    }
  }
  for (std::size_t i = 4; i-- > 0;) {
    const Eigen::MatrixXd& out = enc[i + 1];
    const Eigen::MatrixXd delta =
        upstream.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix()));
    grads.encoder[i].weights.noalias() += delta * enc[i].transpose();
    grads.encoder[i].biases += delta.rowwise().sum();
    if (i > 0) upstream.noalias() = p.encoder[i].weights.transpose() * delta;
  }
  return loss;
}

SaeParameters gradients(const SaeModel& model, std::span<const double> packet, int label_index) {
  check_packet(packet);
  SaeParameters g = model.params.zeros_like();
  const int labels[1] = {label_index};
  accumulate_gradients(model, as_column(packet), labels, g);
  return g;
}

}  // namespace deeppos
