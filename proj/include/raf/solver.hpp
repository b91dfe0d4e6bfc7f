#pragma once

// Iteratively reweighted gradient flow on the amplitude least-squares loss
// L(z) = (1/2m) sum_i (psi_i - |a_i^* z|)^2. Each step recomputes per-datum
// confidence weights from the current iterate and moves along the weighted
// generalized gradient with a constant step size.

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "raf/core.hpp"
#include "raf/metrics.hpp"
#include "raf/sensing.hpp"

namespace raf {

struct WeightScheme {
  enum class Kind { Raf, Constant, HardTruncation };
  Kind kind = Kind::Raf;
  double beta = 10.0;   // Raf: w = r/(r+beta), r = |a^*z|/psi
  double alpha = 0.0;   // HardTruncation: w = 1 if r >= alpha else 0

  static WeightScheme raf(double beta) { return {Kind::Raf, beta, 0.0}; }
  static WeightScheme constant() { return {Kind::Constant, 0.0, 0.0}; }
  static WeightScheme hard_truncation(double alpha) { return {Kind::HardTruncation, 0.0, alpha}; }
};

struct SolverConfig {
  double step_size = 2.0;
  WeightScheme scheme{};
  int max_iters = 2000;
  double stop_tol = 0.0;        // 0 = run all iterations; else stop when ||psi-|Az||| / ||psi|| < tol
  bool trace_distance = false;  // record dist(z^t, x_true) in the trace

  // Model-dependent defaults: mu=2, beta=10 for real Gaussian; mu=6, beta=5 otherwise.
  static SolverConfig for_model(ModelKind kind) {
    SolverConfig c;
    if (kind != ModelKind::RealGaussian) {
      c.step_size = 6.0;
      c.scheme = WeightScheme::raf(5.0);
    }
    return c;
  }
};

struct TraceEntry {
  double residual = 0.0;  // ||psi - |Az||| / ||psi||
  double loss = 0.0;
  double distance = std::numeric_limits<double>::quiet_NaN();
};

template <class Scalar>
struct SolverResult {
  Vec<Scalar> z_final;
  int iterations_run = 0;
  std::vector<TraceEntry> trace;  // length iterations_run + 1 (initial point first)
  double elapsed_seconds = 0.0;
};

// Weights in [0,1]; nonsmooth points ((Az)_i = 0) always get weight 0.
template <class Scalar>
VecXd compute_weights(const WeightScheme& scheme, const Vec<Scalar>& Az, const VecXd& psi) {
  if (Az.size() != psi.size()) throw std::invalid_argument("compute_weights: length mismatch");
  const Index m = psi.size();
  VecXd w(m);
  switch (scheme.kind) {
    case WeightScheme::Kind::Constant:
      w.setOnes();
      return w;
    case WeightScheme::Kind::Raf:
      for (Index i = 0; i < m; ++i) {
        const double mag = std::abs(Az(i));
        if (mag == 0.0) {
          w(i) = 0.0;
        } else if (psi(i) == 0.0) {
          w(i) = 1.0;  // ratio -> +inf limit
        } else {
          const double r = mag / psi(i);
          w(i) = r / (r + scheme.beta);
        }
      }
      return w;
    case WeightScheme::Kind::HardTruncation:
      for (Index i = 0; i < m; ++i) {
        const double mag = std::abs(Az(i));
        if (mag == 0.0) {
          w(i) = 0.0;
        } else if (psi(i) == 0.0) {
          w(i) = 1.0;
        } else {
          w(i) = (mag / psi(i) >= scheme.alpha) ? 1.0 : 0.0;
        }
      }
      return w;
  }
  throw std::logic_error("unknown weight scheme");
}

namespace detail {

// Gradient with Az precomputed: (1/m) A^H (w .* (Az - psi .* phase(Az))).
template <class Scalar>
Vec<Scalar> gradient_from(const Model<Scalar>& model, const Vec<Scalar>& Az, const VecXd& psi,
                          const VecXd& w) {
  Vec<Scalar> residual(Az.size());
  for (Index i = 0; i < Az.size(); ++i)
    residual(i) = w(i) * (Az(i) - psi(i) * phase_of(Az(i)));
  return apply_adjoint(model, residual) / static_cast<double>(model.m);
}

}  // namespace detail

template <class Scalar>
Vec<Scalar> generalized_gradient(const Model<Scalar>& model, const Vec<Scalar>& z,
                                 const VecXd& psi, const VecXd& w) {
  if (z.size() != model.n || psi.size() != model.m || w.size() != model.m)
    throw std::invalid_argument("generalized_gradient: dimension mismatch");
  return detail::gradient_from(model, apply_forward(model, z), psi, w);
}

template <class Scalar>
std::pair<Vec<Scalar>, VecXd> step(const Model<Scalar>& model, const Vec<Scalar>& z,
                                   const VecXd& psi, const SolverConfig& config) {
  const Vec<Scalar> Az = apply_forward(model, z);
  VecXd w = compute_weights(config.scheme, Az, psi);
  Vec<Scalar> z_next = z - config.step_size * detail::gradient_from(model, Az, psi, w);
  return {std::move(z_next), std::move(w)};
}

template <class Scalar>
double loss(const ProblemInstance<Scalar>& inst, const Vec<Scalar>& z) {
  if (z.size() != inst.model.n) throw std::invalid_argument("loss: signal length mismatch");
  const VecXd magnitudes = apply_forward(inst.model, z).cwiseAbs();
  return (inst.psi - magnitudes).squaredNorm() / (2.0 * static_cast<double>(inst.model.m));
}

template <class Scalar>
SolverResult<Scalar> solve(const ProblemInstance<Scalar>& inst, const Vec<Scalar>& init,
                           const SolverConfig& config) {
  if (init.size() != inst.model.n) throw std::invalid_argument("solve: init length mismatch");
  if (config.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");
  const auto t_start = std::chrono::steady_clock::now();
  const double psi_norm = inst.psi.norm();
  const double m = static_cast<double>(inst.model.m);

  SolverResult<Scalar> result;
  result.trace.reserve(static_cast<std::size_t>(config.max_iters) + 1);
  Vec<Scalar> z = init;

  auto record = [&](const Vec<Scalar>& Az) {
    TraceEntry entry;
    const double diff = (inst.psi - Az.cwiseAbs()).norm();
    entry.residual = psi_norm > 0.0 ? diff / psi_norm : diff;
    entry.loss = diff * diff / (2.0 * m);
    if (config.trace_distance && inst.x_true.size() == z.size())
      entry.distance = distance(z, inst.x_true);
    result.trace.push_back(entry);
    return entry.residual;
  };

  Vec<Scalar> Az = apply_forward(inst.model, z);
  double residual = record(Az);
  for (int t = 0; t < config.max_iters; ++t) {
    if (config.stop_tol > 0.0 && residual < config.stop_tol) break;
    const VecXd w = compute_weights(config.scheme, Az, inst.psi);
    z -= config.step_size * detail::gradient_from(inst.model, Az, inst.psi, w);
    Az = apply_forward(inst.model, z);
    residual = record(Az);
    ++result.iterations_run;
  }

  result.z_final = std::move(z);
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace raf
