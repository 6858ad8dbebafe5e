#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "deeppos/sae.hpp"

namespace deeppos {

struct RmspropSettings {
  double learning_rate = 1e-3;
  double decay = 0.9;  // rho
  double epsilon = 1e-8;
};

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// cache <- rho * cache + (1 - rho) * g^2
/// param <- param - lr * g / (sqrt(cache) + eps)
/// Throws divergence (naming the offending index) on a non-finite gradient,
/// before touching any state.
void rmsprop_update(std::span<double> params, std::span<const double> grads,
                    std::span<double> cache, const RmspropSettings& s);

/// Bias-corrected Adam; `step` is the 1-based update count.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamSettings& s);

struct RmspropState {
  SaeParameters cache;
};

RmspropState make_rmsprop_state(const SaeParameters& like);

void rmsprop_step(SaeParameters& params, const SaeParameters& grads, RmspropState& state,
                  const RmspropSettings& s);

enum class OptimizerKind { rmsprop, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);

/// Owns the per-parameter moments for whichever rule is configured.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, const SaeParameters& like, double learning_rate, double decay,
            double beta1, double beta2, double epsilon);

  void step(SaeParameters& params, const SaeParameters& grads);

  OptimizerKind kind() const { return kind_; }
  std::size_t state_bytes() const;

 private:
  OptimizerKind kind_;
  RmspropSettings rms_;
  AdamSettings adam_;
  SaeParameters first_;   // RMSprop cache, or Adam first moment
  SaeParameters second_;  // Adam second moment; unused for RMSprop
  std::uint64_t steps_ = 0;
};

}  // namespace deeppos
