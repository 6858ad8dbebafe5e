#include "deeppos/optimizer.hpp"

#include <cmath>

#include "deeppos/error.hpp"

namespace deeppos {

namespace {

void check_finite(std::span<const double> grads) {
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      fail(ErrorCode::divergence, "non-finite gradient at flat index " + std::to_string(i) +
                                      " (value " + std::to_string(grads[i]) + ")");
}

void check_sizes(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c)
    fail(ErrorCode::dimension_mismatch, "optimizer tensors have mismatched sizes");
}

}  // namespace

void rmsprop_update(std::span<double> params, std::span<const double> grads,
                    std::span<double> cache, const RmspropSettings& s) {
  check_sizes(params.size(), grads.size(), cache.size());
  if (!(s.decay > 0.0 && s.decay < 1.0))
    fail(ErrorCode::invalid_argument, "RMSprop decay must lie in (0,1)");
  check_finite(grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    cache[i] = s.decay * cache[i] + (1.0 - s.decay) * g * g;
    params[i] -= s.learning_rate * g / (std::sqrt(cache[i]) + s.epsilon);
  }
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamSettings& s) {
  check_sizes(params.size(), grads.size(), m.size());
  check_sizes(params.size(), grads.size(), v.size());
  if (step == 0) fail(ErrorCode::invalid_argument, "Adam step count is 1-based");
  check_finite(grads);
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
    params[i] -= s.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.epsilon);
  }
}

RmspropState make_rmsprop_state(const SaeParameters& like) { return {like.zeros_like()}; }

void rmsprop_step(SaeParameters& params, const SaeParameters& grads, RmspropState& state,
                  const RmspropSettings& s) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto c = state.cache.tensors();
  if (p.size() != g.size() || p.size() != c.size())
    fail(ErrorCode::dimension_mismatch, "parameter sets differ in layout");
  // Validate everything first so a bad gradient leaves params untouched.
  for (const auto& t : g) check_finite(t);
  for (std::size_t i = 0; i < p.size(); ++i) rmsprop_update(p[i], g[i], c[i], s);
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "rmsprop";
}

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  if (name == "adam") return OptimizerKind::adam;
  fail(ErrorCode::invalid_argument, "unknown optimizer '" + std::string(name) + "'");
}

Optimizer::Optimizer(OptimizerKind kind, const SaeParameters& like, double learning_rate,
                     double decay, double beta1, double beta2, double epsilon)
    : kind_(kind),
      rms_{learning_rate, decay, epsilon},
      adam_{learning_rate, beta1, beta2, epsilon},
      first_(like.zeros_like()) {
  if (!(learning_rate > 0.0)) fail(ErrorCode::invalid_argument, "learning rate must be positive");
  if (!(epsilon > 0.0)) fail(ErrorCode::invalid_argument, "epsilon must be positive");
  if (kind_ == OptimizerKind::rmsprop && !(decay > 0.0 && decay < 1.0))
    fail(ErrorCode::invalid_argument, "RMSprop decay must lie in (0,1)");
  if (kind_ == OptimizerKind::adam && !(beta1 >= 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    fail(ErrorCode::invalid_argument, "Adam betas must lie in [0,1) and (0,1)");
  if (kind_ == OptimizerKind::adam) second_ = like.zeros_like();
}

void Optimizer::step(SaeParameters& params, const SaeParameters& grads) {
  if (kind_ == OptimizerKind::rmsprop) {
    RmspropState state{std::move(first_)};
    try {
      rmsprop_step(params, grads, state, rms_);
    } catch (...) {
      first_ = std::move(state.cache);
      throw;
    }
    first_ = std::move(state.cache);
    ++steps_;
    return;
  }
  for (const auto& t : grads.tensors()) {
    for (double g : t)
      if (!std::isfinite(g)) fail(ErrorCode::divergence, "non-finite gradient in Adam step");
  }
  ++steps_;
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = first_.tensors();
  auto v = second_.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) adam_update(p[i], g[i], m[i], v[i], steps_, adam_);
}

std::size_t Optimizer::state_bytes() const {
  const std::size_t per = first_.scalar_count() * sizeof(double);
  return kind_ == OptimizerKind::adam ? 2 * per : per;
}

}  // namespace deeppos
