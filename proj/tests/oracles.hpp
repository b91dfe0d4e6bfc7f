#pragma once

// Test-only reference implementations, kept independent of the matrix-free
// code paths they check: explicit DFT/sensing matrices, densely assembled
// initialization matrices, central finite differences for the frozen-weight
// loss, and a two-sided binomial sign test.

#include <cmath>
#include <complex>
#include <vector>

#include "raf/core.hpp"
#include "raf/sensing.hpp"

namespace oracles {

using raf::cxd;
using raf::Index;

// Explicit n x n DFT matrix with kernel e^{-j 2 pi k l / n}, no scaling.
inline raf::Mat<cxd> dft_matrix(Index n) {
  raf::Mat<cxd> f(n, n);
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l)
      f(k, l) = std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(l) /
                                    static_cast<double>(n));
  return f;
}

// Densely materialized sensing operator: A itself for Gaussian models,
// stacked F D^(k) blocks for CDP.
template <class Scalar>
raf::Mat<Scalar> dense_operator(const raf::Model<Scalar>& model) {
  if (model.kind != raf::ModelKind::Cdp) return model.matrix;
  if constexpr (raf::is_complex_v<Scalar>) {
    const raf::Mat<cxd> f = dft_matrix(model.n);
    raf::Mat<cxd> a(model.m, model.n);
    for (Index k = 0; k < model.mask_count(); ++k)
      a.middleRows(k * model.n, model.n) = f * model.masks[k].asDiagonal();
    return a;
  } else {
    throw std::logic_error("CDP model holds no real data");
  }
}

// Y = (1/m) sum_i w_i a_i a_i^* assembled explicitly.
template <class Scalar>
raf::Mat<Scalar> dense_init_matrix(const raf::Model<Scalar>& model, const raf::VecXd& weights) {
  const raf::Mat<Scalar> a = dense_operator(model);
  raf::Mat<Scalar> y = raf::Mat<Scalar>::Zero(model.n, model.n);
  for (Index i = 0; i < model.m; ++i)
    y += weights(i) * (a.row(i).adjoint() * a.row(i));
  return y / static_cast<double>(model.m);
}

// Frozen-weight loss (1/2m) sum_i w_i (psi_i - |a_i^* z|)^2.
template <class Scalar>
double frozen_loss(const raf::Model<Scalar>& model, const raf::Vec<Scalar>& z,
                   const raf::VecXd& psi, const raf::VecXd& w) {
  const raf::VecXd mags = raf::apply_forward(model, z).cwiseAbs();
  double sum = 0.0;
  for (Index i = 0; i < model.m; ++i) {
    const double d = psi(i) - mags(i);
    sum += w(i) * d * d;
  }
  return sum / (2.0 * static_cast<double>(model.m));
}

// Central finite differences of the frozen-weight loss w.r.t. the real (and,
// for complex scalars, imaginary) coordinates of z.
template <class Scalar>
raf::Vec<Scalar> fd_gradient(const raf::Model<Scalar>& model, const raf::Vec<Scalar>& z,
                             const raf::VecXd& psi, const raf::VecXd& w, double h = 1e-6) {
  raf::Vec<Scalar> grad(z.size());
  raf::Vec<Scalar> probe = z;
  for (Index k = 0; k < z.size(); ++k) {
    probe(k) = z(k) + Scalar(h);
    const double up_re = frozen_loss(model, probe, psi, w);
    probe(k) = z(k) - Scalar(h);
    const double dn_re = frozen_loss(model, probe, psi, w);
    probe(k) = z(k);
    const double d_re = (up_re - dn_re) / (2.0 * h);
    if constexpr (raf::is_complex_v<Scalar>) {
      probe(k) = z(k) + Scalar(0, h);
      const double up_im = frozen_loss(model, probe, psi, w);
      probe(k) = z(k) - Scalar(0, h);
      const double dn_im = frozen_loss(model, probe, psi, w);
      probe(k) = z(k);
      grad(k) = Scalar(d_re, (up_im - dn_im) / (2.0 * h));
    } else {
      grad(k) = d_re;
    }
  }
  return grad;
}

// Two-sided sign test p-value: probability of >= wins successes (or as
// extreme the other way) among trials fair coin flips.
inline double sign_test_p_value(int wins, int trials) {
  auto log_choose = [](int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  };
  const int extreme = std::max(wins, trials - wins);
  double tail = 0.0;
  for (int k = extreme; k <= trials; ++k)
    tail += std::exp(log_choose(trials, k) - trials * std::log(2.0));
  return std::min(1.0, 2.0 * tail);
}

}  // namespace oracles
