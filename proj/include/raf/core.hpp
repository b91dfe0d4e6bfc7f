#pragma once

#include <complex>
#include <type_traits>

#include <Eigen/Dense>

namespace raf {

using cxd = std::complex<double>;

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecXd = Vec<double>;
using VecXcd = Vec<cxd>;
using Index = Eigen::Index;

template <class Scalar>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

// u/|u| elementwise with phase(0) := 0; reduces to sign() for real scalars.
template <class Scalar>
inline Scalar phase_of(Scalar u) {
  if constexpr (is_complex_v<Scalar>) {
    const double mag = std::abs(u);
    return mag == 0.0 ? Scalar(0) : u / mag;
  } else {
    return u > 0 ? Scalar(1) : (u < 0 ? Scalar(-1) : Scalar(0));
  }
}

}  // namespace raf
