#pragma once

// Sign/phase-invariant error metrics. Real signals are identifiable only up to
// a global sign, complex ones up to a global phase; distance() quotients that
// ambiguity out. The success criterion uses the magnitude residual
// ||psi - |Az||| / ||x||, which needs no phase alignment at all.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "raf/core.hpp"
#include "raf/sensing.hpp"

namespace raf {

// min(||z - x||, ||z + x||)
inline double distance(const VecXd& z, const VecXd& x) {
  if (z.size() != x.size()) throw std::invalid_argument("distance: length mismatch");
  return std::min((z - x).norm(), (z + x).norm());
}

// min over global phase: ||z - e^{j phi*} x|| with phi* = arg(x^H z).
inline double distance(const VecXcd& z, const VecXcd& x) {
  if (z.size() != x.size()) throw std::invalid_argument("distance: length mismatch");
  const cxd overlap = x.dot(z);  // x^H z
  const double mag = std::abs(overlap);
  const cxd rotation = mag == 0.0 ? cxd(1, 0) : overlap / mag;
  return (z - rotation * x).norm();
}

struct EvalReport {
  double dist = 0.0;
  double relative_error = 0.0;  // dist / ||x||
  double nmse = 0.0;            // dist^2 / ||x||^2
  double residual = 0.0;        // ||psi - |Az||| / ||x||
  bool success = false;
  double threshold = 1e-5;
};

template <class Scalar>
EvalReport evaluate(const ProblemInstance<Scalar>& inst, const Vec<Scalar>& z,
                    double success_threshold = 1e-5) {
  EvalReport report;
  report.threshold = success_threshold;
  const double x_norm = inst.x_true.norm();
  report.dist = distance(z, inst.x_true);
  report.relative_error = x_norm > 0.0 ? report.dist / x_norm : report.dist;
  report.nmse = report.relative_error * report.relative_error;
  const double diff = (inst.psi - apply_forward(inst.model, z).cwiseAbs()).norm();
  report.residual = x_norm > 0.0 ? diff / x_norm : diff;
  report.success = report.residual < success_threshold;
  return report;
}

}  // namespace raf
