#pragma once

// Measurement models for phase retrieval: dense real/complex Gaussian sensing
// matrices and coded diffraction patterns (CDP). The CDP operator is applied
// matrix-free as K unnormalized DFTs of the mask-multiplied signal; the DFT
// kernel is e^{-j2*pi*kl/n} with no 1/n or 1/sqrt(n) scaling, so every row of
// the stacked operator has squared norm n and (1/m)*sum(psi^2) estimates
// ||x||^2 under both model families.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "raf/core.hpp"
#include "raf/rng.hpp"

namespace raf {

enum class ModelKind { RealGaussian, ComplexGaussian, Cdp };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::RealGaussian: return "real-gaussian";
    case ModelKind::ComplexGaussian: return "complex-gaussian";
    case ModelKind::Cdp: return "cdp";
  }
  return "?";
}

template <class Scalar>
struct Model {
  ModelKind kind = ModelKind::RealGaussian;
  Index n = 0;  // signal length
  Index m = 0;  // measurement count (K*n for CDP)
  Mat<Scalar> matrix;          // Gaussian variants: m x n, row i = a_i^*
  std::vector<VecXcd> masks;   // CDP: K unit-modulus diagonal masks

  Index mask_count() const { return static_cast<Index>(masks.size()); }
};

template <class Scalar>
Model<Scalar> sample_gaussian(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("sample_gaussian: n and m must be >= 1");
  Model<Scalar> model;
  model.kind = is_complex_v<Scalar> ? ModelKind::ComplexGaussian : ModelKind::RealGaussian;
  model.n = n;
  model.m = m;
  model.matrix.resize(m, n);
  rng::Stream stream(rng::derive_stream(seed, "model"));
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      if constexpr (is_complex_v<Scalar>)
        model.matrix(i, j) = stream.cnormal();
      else
        model.matrix(i, j) = stream.normal();
    }
  return model;
}

inline Model<cxd> sample_cdp(Index n, Index mask_count, std::uint64_t seed) {
  if (n < 1 || mask_count < 1) throw std::invalid_argument("sample_cdp: n and K must be >= 1");
  static const cxd alphabet[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  Model<cxd> model;
  model.kind = ModelKind::Cdp;
  model.n = n;
  model.m = mask_count * n;
  model.masks.resize(mask_count);
  rng::Stream stream(rng::derive_stream(seed, "model"));
  for (Index k = 0; k < mask_count; ++k) {
    model.masks[k].resize(n);
    for (Index l = 0; l < n; ++l) model.masks[k](l) = alphabet[stream.uniform_index(4)];
  }
  return model;
}

// Dispatcher over the model kind; m_or_K is m for Gaussian variants, K for CDP.
template <class Scalar>
Model<Scalar> sample_model(ModelKind kind, Index n, Index m_or_K, std::uint64_t seed) {
  switch (kind) {
    case ModelKind::RealGaussian:
      if constexpr (is_complex_v<Scalar>)
        throw std::invalid_argument("RealGaussian model requires a real scalar type");
      else
        return sample_gaussian<Scalar>(n, m_or_K, seed);
    case ModelKind::ComplexGaussian:
      if constexpr (!is_complex_v<Scalar>)
        throw std::invalid_argument("ComplexGaussian model requires a complex scalar type");
      else
        return sample_gaussian<Scalar>(n, m_or_K, seed);
    case ModelKind::Cdp:
      if constexpr (!is_complex_v<Scalar>)
        throw std::invalid_argument("CDP model requires a complex scalar type");
      else
        return sample_cdp(n, m_or_K, seed);
  }
  throw std::invalid_argument("unknown model kind");
}

// A*z. Pure; safe to call concurrently on the same model.
template <class Scalar>
Vec<Scalar> apply_forward(const Model<Scalar>& model, const Vec<Scalar>& z) {
  if (z.size() != model.n) throw std::invalid_argument("apply_forward: signal length mismatch");
  if (model.kind != ModelKind::Cdp) return model.matrix * z;
  if constexpr (!is_complex_v<Scalar>) {
    throw std::logic_error("CDP model holds no real data");
  } else {
    Vec<Scalar> out(model.m);
    Eigen::FFT<double> fft;
    VecXcd masked(model.n), spectrum(model.n);
    for (Index k = 0; k < model.mask_count(); ++k) {
      masked = model.masks[k].cwiseProduct(z);
      fft.fwd(spectrum, masked);
      out.segment(k * model.n, model.n) = spectrum;
    }
    return out;
  }
}

// A^H * u (conjugate transpose).
template <class Scalar>
Vec<Scalar> apply_adjoint(const Model<Scalar>& model, const Vec<Scalar>& u) {
  if (u.size() != model.m) throw std::invalid_argument("apply_adjoint: measurement length mismatch");
  if (model.kind != ModelKind::Cdp) return model.matrix.adjoint() * u;
  if constexpr (!is_complex_v<Scalar>) {
    throw std::logic_error("CDP model holds no real data");
  } else {
    Vec<Scalar> out = Vec<Scalar>::Zero(model.n);
    Eigen::FFT<double> fft;
    VecXcd block(model.n), back(model.n);
    for (Index k = 0; k < model.mask_count(); ++k) {
      block = u.segment(k * model.n, model.n);
      fft.inv(back, block);  // (1/n) F^H; rescale below
      out += model.masks[k].conjugate().cwiseProduct(back) * static_cast<double>(model.n);
    }
    return out;
  }
}

template <class Scalar>
struct ProblemInstance {
  Model<Scalar> model;
  Vec<Scalar> x_true;
  VecXd psi;           // nonnegative magnitudes, length m
  double noise_sigma = 0.0;
};

// psi_i = max(0, |(Ax)_i| + eta_i), eta_i ~ N(0, sigma^2).
template <class Scalar>
ProblemInstance<Scalar> measure(const Model<Scalar>& model, const Vec<Scalar>& x,
                                double noise_sigma, std::uint64_t seed) {
  if (x.size() != model.n) throw std::invalid_argument("measure: signal length mismatch");
  if (noise_sigma < 0.0) throw std::invalid_argument("measure: noise_sigma must be >= 0");
  ProblemInstance<Scalar> inst;
  inst.model = model;
  inst.x_true = x;
  inst.noise_sigma = noise_sigma;
  inst.psi = apply_forward(model, x).cwiseAbs();
  if (noise_sigma > 0.0) {
    rng::Stream noise(rng::derive_stream(seed, "noise"));
    for (Index i = 0; i < inst.psi.size(); ++i)
      inst.psi(i) = std::max(0.0, inst.psi(i) + noise_sigma * noise.normal());
  }
  return inst;
}

// sigma with sigma^2 = ||Ax||^2 / (m * 10^(snr_db/10)); +inf means noiseless.
template <class Scalar>
double sigma_for_snr(const Model<Scalar>& model, const Vec<Scalar>& x, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (!std::isfinite(snr_db)) throw std::invalid_argument("sigma_for_snr: snr_db must be finite or +inf");
  const double energy = apply_forward(model, x).squaredNorm();
  if (energy == 0.0) throw std::invalid_argument("sigma_for_snr: zero signal");
  return std::sqrt(energy / (static_cast<double>(model.m) * std::pow(10.0, snr_db / 10.0)));
}

// x with i.i.d. N(0,1) (real) or CN(0,1) (complex) entries.
template <class Scalar>
Vec<Scalar> random_signal(Index n, std::uint64_t seed) {
  Vec<Scalar> x(n);
  rng::Stream stream(rng::derive_stream(seed, "signal"));
  for (Index i = 0; i < n; ++i) {
    if constexpr (is_complex_v<Scalar>)
      x(i) = stream.cnormal();
    else
      x(i) = stream.normal();
  }
  return x;
}

}  // namespace raf
