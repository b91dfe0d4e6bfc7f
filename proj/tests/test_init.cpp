#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "raf/init.hpp"
#include "raf/metrics.hpp"
#include "raf/rng.hpp"
#include "raf/sensing.hpp"

using namespace raf;

TEST_CASE("estimate_norm is sqrt of the mean squared magnitude") {
  VecXd ones(4);
  ones << 1, 1, 1, 1;
  CHECK(estimate_norm(ones) == doctest::Approx(1.0));

  VecXd psi(2);
  psi << 3, 4;
  CHECK(estimate_norm(psi) == doctest::Approx(std::sqrt(12.5)));

  CHECK_THROWS_AS(estimate_norm(VecXd{}), std::invalid_argument);
}

TEST_CASE("select_subset keeps the largest magnitudes, ties to the lower index") {
  VecXd psi(5);
  psi << 0.1, 3.0, 2.0, 0.5, 2.5;
  const auto top3 = select_subset(psi, 3);
  CHECK(top3 == std::vector<Index>{1, 4, 2});

  const auto all = select_subset(psi, 5);
  CHECK(all.size() == 5);

  VecXd tied(3);
  tied << 2, 2, 1;
  CHECK(select_subset(tied, 1) == std::vector<Index>{0});
  CHECK(select_subset(tied, 2) == std::vector<Index>{0, 1});

  CHECK_THROWS_AS(select_subset(psi, 0), std::invalid_argument);
  CHECK_THROWS_AS(select_subset(psi, 6), std::invalid_argument);
}

TEST_CASE("default subset fraction reproduces floor(3m/13)") {
  const InitConfig config;
  for (Index m : {13, 26, 999, 1000, 2000}) {
    const Index card = static_cast<Index>(std::floor(config.subset_fraction * m));
    CHECK(card == 3 * m / 13);
  }
}

TEST_CASE("init weights are psi^gamma on the subset and zero elsewhere") {
  VecXd psi(3);
  psi << 4, 9, 16;
  const auto w = init_weights(psi, {0, 2}, 0.5);
  CHECK(w(0) == doctest::Approx(2.0));
  CHECK(w(1) == 0.0);
  CHECK(w(2) == doctest::Approx(4.0));

  const auto flat = init_weights(psi, {0, 1}, 0.0);
  CHECK(flat(0) == 1.0);
  CHECK(flat(1) == 1.0);
  CHECK(flat(2) == 0.0);
}

TEST_CASE("apply_init_matrix edge cases") {
  const auto model = sample_gaussian<double>(4, 10, 3);
  const VecXd v = random_signal<double>(4, 5);
  CHECK(apply_init_matrix(model, VecXd::Zero(10), v).norm() == 0.0);

  Model<double> ident;
  ident.kind = ModelKind::RealGaussian;
  ident.n = ident.m = 4;
  ident.matrix = Mat<double>::Identity(4, 4);
  const VecXd y = apply_init_matrix(ident, VecXd::Ones(4), v);
  CHECK((y - v / 4.0).norm() < 1e-15);

  CHECK_THROWS_AS(apply_init_matrix(model, VecXd::Ones(9), v), std::invalid_argument);
}

TEST_CASE("matrix-free init operator matches the densely assembled Y") {
  for (int trial = 0; trial < 5; ++trial) {
    const std::uint64_t seed = rng::derive_stream(99, "dense-oracle", trial);
    {
      const auto model = sample_gaussian<double>(3, 5, seed);
      const VecXd x = random_signal<double>(3, seed);
      const auto inst = measure(model, x, 0.0, seed);
      const auto w = init_weights(inst.psi, select_subset(inst.psi, 3), 0.5);
      const auto dense = oracles::dense_init_matrix(model, w);
      const VecXd v = random_signal<double>(3, seed + 1);
      CHECK((apply_init_matrix(model, w, v) - dense * v).norm() < 1e-12);
    }
    {
      const auto model = sample_cdp(4, 2, seed);
      const VecXcd x = random_signal<cxd>(4, seed);
      const auto inst = measure(model, x, 0.0, seed);
      const auto w = init_weights(inst.psi, select_subset(inst.psi, 3), 0.5);
      const auto dense = oracles::dense_init_matrix(model, w);
      const VecXcd v = random_signal<cxd>(4, seed + 1);
      CHECK((apply_init_matrix(model, w, v) - dense * v).norm() < 1e-11);
    }
  }
}

TEST_CASE("power method finds the dominant eigenvector") {
  Mat<double> diag = Mat<double>::Zero(2, 2);
  diag(0, 0) = 2.0;
  diag(1, 1) = 1.0;
  auto [v, used] = power_method<double>([&](const VecXd& u) { return VecXd(diag * u); }, 2, 100,
                                        0.0, 7);
  CHECK(used == 100);
  CHECK(std::abs(std::abs(v(0)) - 1.0) < 1e-8);
  CHECK(std::abs(v(1)) < 1e-8);
}

TEST_CASE("power method on the identity returns the start vector") {
  auto [v1, u1] = power_method<double>([](const VecXd& u) { return u; }, 5, 1, 0.0, 13);
  auto [v2, u2] = power_method<double>([](const VecXd& u) { return u; }, 5, 50, 0.0, 13);
  CHECK((v1 - v2).norm() < 1e-14);
}

TEST_CASE("power method agrees with a dense eigensolver on random PSD matrices") {
  rng::Stream stream(55);
  for (int trial = 0; trial < 5; ++trial) {
    Mat<double> b(5, 5);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j) b(i, j) = stream.normal();
    const Mat<double> psd = b.transpose() * b;
    auto [v, used] = power_method<double>([&](const VecXd& u) { return VecXd(psd * u); }, 5, 500,
                                          0.0, trial);
    Eigen::SelfAdjointEigenSolver<Mat<double>> eig(psd);
    const VecXd top = eig.eigenvectors().col(4);
    const double angle = std::acos(std::min(1.0, std::abs(top.dot(v))));
    CHECK(angle < 1e-6);
  }
}

TEST_CASE("power method validates its inputs") {
  CHECK_THROWS_AS(power_method<double>([](const VecXd&) { return VecXd::Zero(3); }, 5, 10, 0.0, 1),
                  std::runtime_error);
  CHECK_THROWS_AS(power_method<double>([](const VecXd& u) { return u; }, 5, 0, 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("eig_tol > 0 exits early on an exact eigenvector") {
  Mat<double> diag = Mat<double>::Zero(2, 2);
  diag(0, 0) = 3.0;
  diag(1, 1) = 0.5;
  auto [v, used] = power_method<double>([&](const VecXd& u) { return VecXd(diag * u); }, 2, 1000,
                                        1e-12, 3);
  CHECK(used < 1000);
  CHECK(std::abs(std::abs(v(0)) - 1.0) < 1e-10);
}

TEST_CASE("initialize output is consistently scaled and normalized") {
  const auto model = sample_gaussian<double>(20, 120, 8);
  const VecXd x = random_signal<double>(20, 9);
  const auto inst = measure(model, x, 0.0, 8);
  const InitConfig config;
  const auto result = initialize(inst, config);
  CHECK(std::abs(result.direction.norm() - 1.0) < 1e-12);
  CHECK(std::abs(result.z0.norm() - result.norm_estimate) < 1e-12);
  CHECK(result.norm_estimate == doctest::Approx(estimate_norm(inst.psi)));
  CHECK(result.selected.size() ==
        static_cast<std::size_t>(std::floor(config.subset_fraction * inst.psi.size())));
}

TEST_CASE("scaling psi leaves the direction fixed and scales the norm estimate") {
  const auto model = sample_gaussian<double>(12, 80, 21);
  const VecXd x = random_signal<double>(12, 22);
  auto inst = measure(model, x, 0.0, 21);
  const InitConfig config;
  const auto base = initialize(inst, config);

  const double c = 3.7;
  inst.psi *= c;
  const auto scaled = initialize(inst, config);
  CHECK((scaled.direction - base.direction).norm() < 1e-12);
  CHECK(scaled.norm_estimate == doctest::Approx(c * base.norm_estimate));
}

TEST_CASE("init error shrinks with more data (m = 4n vs m = 2n)") {
  const Index n = 200;
  double err_2n = 0.0, err_4n = 0.0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = rng::derive_stream(77, "paired", trial);
    const VecXd x = random_signal<double>(n, rng::derive_stream(seed, "x"));
    for (Index m : {2 * n, 4 * n}) {
      const auto model = sample_gaussian<double>(n, m, rng::derive_stream(seed, "A", m));
      const auto inst = measure(model, x, 0.0, seed);
      const auto init = initialize(inst, InitConfig{});
      const double err = distance(init.z0, x) / x.norm();
      (m == 2 * n ? err_2n : err_4n) += err / trials;
    }
  }
  CHECK(err_4n <= err_2n);
}

TEST_CASE("initialization concentrates at m/n = 50") {
  // Oracle-frozen level: dense eigensolvers on this estimator put the
  // relative error near 0.25 at n=100, m=5000, tightly concentrated.
  double mean = 0.0, worst = 0.0;
  const int trials = 10;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = rng::derive_stream(101, "quality", trial);
    const auto model = sample_gaussian<double>(100, 5000, seed);
    const VecXd x = random_signal<double>(100, rng::derive_stream(seed, "x"));
    const auto inst = measure(model, x, 0.0, seed);
    const auto init = initialize(inst, InitConfig{});
    const double err = distance(init.z0, x) / x.norm();
    mean += err / trials;
    worst = std::max(worst, err);
  }
  CHECK(mean > 0.15);
  CHECK(mean < 0.32);
  CHECK(worst < 0.40);
}
