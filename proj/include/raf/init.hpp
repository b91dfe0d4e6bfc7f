#pragma once

// Weighted maximal-correlation initialization: estimate ||x|| from the
// magnitude data, keep the measurements with the largest magnitudes, weight
// each kept row by psi_i^gamma, and take the principal eigenvector of
// Y = (1/m) sum_i w_i a_i a_i^* via matrix-free power iterations.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "raf/core.hpp"
#include "raf/rng.hpp"
#include "raf/sensing.hpp"

namespace raf {

struct InitConfig {
  double subset_fraction = 3.0 / 13.0;  // |S| = floor(subset_fraction * m)
  double gamma = 0.5;                   // weight exponent
  int power_iters = 200;
  double eig_tol = 0.0;  // 0 = run the fixed iteration count
  std::uint64_t power_seed = 0x72616601;  // start vector stream
};

template <class Scalar>
struct InitResult {
  Vec<Scalar> z0;         // norm_estimate * direction
  Vec<Scalar> direction;  // unit principal eigenvector of Y
  double norm_estimate = 0.0;
  std::vector<Index> selected;
  int iterations_used = 0;
};

// sqrt((1/m) * sum psi_i^2)
inline double estimate_norm(const VecXd& psi) {
  if (psi.size() == 0) throw std::invalid_argument("estimate_norm: empty psi");
  return std::sqrt(psi.squaredNorm() / static_cast<double>(psi.size()));
}

// Indices of the `cardinality` largest magnitudes; ties broken by lower index.
inline std::vector<Index> select_subset(const VecXd& psi, Index cardinality) {
  const Index m = psi.size();
  if (cardinality < 1 || cardinality > m)
    throw std::invalid_argument("select_subset: cardinality out of range");
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&psi](Index a, Index b) { return psi(a) > psi(b); });
  order.resize(static_cast<std::size_t>(cardinality));
  return order;
}

// w_i = psi_i^gamma for i in S, 0 otherwise.
inline VecXd init_weights(const VecXd& psi, const std::vector<Index>& subset, double gamma) {
  VecXd w = VecXd::Zero(psi.size());
  for (Index i : subset) w(i) = std::pow(psi(i), gamma);
  return w;
}

// Y*v = (1/m) A^H (w .* (A v)), matrix-free.
template <class Scalar>
Vec<Scalar> apply_init_matrix(const Model<Scalar>& model, const VecXd& weights,
                              const Vec<Scalar>& v) {
  if (weights.size() != model.m) throw std::invalid_argument("apply_init_matrix: weight length mismatch");
  Vec<Scalar> projected = apply_forward(model, v);
  projected.array() *= weights.array().template cast<Scalar>();
  return apply_adjoint(model, projected) / static_cast<double>(model.m);
}

// Power iterations on a Hermitian PSD operator. Starts from a seeded random
// unit vector; with tol > 0, exits early once ||Yv - (v^H Y v) v|| < tol.
template <class Scalar, class Op>
std::pair<Vec<Scalar>, int> power_method(Op&& apply, Index n, int iters, double tol,
                                         std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("power_method: iters must be >= 1");
  rng::Stream stream(rng::derive_stream(seed, "power-start"));
  Vec<Scalar> v(n);
  for (Index i = 0; i < n; ++i) {
    if constexpr (is_complex_v<Scalar>)
      v(i) = stream.cnormal();
    else
      v(i) = stream.normal();
  }
  v /= v.norm();
  int used = 0;
  for (int t = 0; t < iters; ++t) {
    Vec<Scalar> yv = apply(v);
    if (yv.size() != n) throw std::runtime_error("power_method: operator returned wrong dimension");
    ++used;
    if (tol > 0.0) {
      const double rayleigh = std::real(v.dot(yv));
      if ((yv - rayleigh * v).norm() < tol) {
        const double norm = yv.norm();
        if (norm > 0.0) v = yv / norm;
        break;
      }
    }
    const double norm = yv.norm();
    if (norm == 0.0) break;  // v in the null space; keep the current vector
    v = yv / norm;
  }
  return {std::move(v), used};
}

template <class Scalar>
InitResult<Scalar> initialize(const ProblemInstance<Scalar>& inst, const InitConfig& config) {
  const Index m = inst.psi.size();
  const Index cardinality = std::max<Index>(
      1, static_cast<Index>(std::floor(config.subset_fraction * static_cast<double>(m))));
  InitResult<Scalar> result;
  result.norm_estimate = estimate_norm(inst.psi);
  result.selected = select_subset(inst.psi, std::min(cardinality, m));
  const VecXd weights = init_weights(inst.psi, result.selected, config.gamma);
  auto [direction, used] = power_method<Scalar>(
      [&](const Vec<Scalar>& v) { return apply_init_matrix(inst.model, weights, v); },
      inst.model.n, config.power_iters, config.eig_tol, config.power_seed);
  result.direction = std::move(direction);
  result.iterations_used = used;
  result.z0 = result.norm_estimate * result.direction;
  return result;
}

}  // namespace raf
