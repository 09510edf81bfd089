#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "debtrank/contagion.hpp"
#include "debtrank/errors.hpp"
#include "debtrank/rng.hpp"
#include "debtrank/spectral.hpp"
#include "support.hpp"

using namespace debtrank;

namespace {

Eigen::MatrixXd two_by_two(double a01, double a10) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 1) = a01;
  m(1, 0) = a10;
  return m;
}

}  // namespace

TEST_CASE("spectral radius of simple matrices") {
  SUBCASE("zero matrix") {
    auto report = spectral_radius(Eigen::MatrixXd::Zero(3, 3));
    CHECK(report.spectral_radius == 0.0);
    CHECK(report.classification == StabilityClass::kStable);
  }
  SUBCASE("two-bank fixture, sqrt(0.1)") {
    // eigenvalues come in an opposite-sign pair, which defeats plain power
    // iteration; the answer must come out right anyway
    auto report = spectral_radius(two_by_two(0.5, 0.2));
    CHECK(report.spectral_radius ==
          doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
    CHECK(report.classification == StabilityClass::kStable);
    CHECK(report.used_dense_fallback);
  }
  SUBCASE("nilpotent matrix has radius exactly zero") {
    auto report = spectral_radius(two_by_two(0.7, 0.0));
    CHECK(report.spectral_radius == 0.0);
    CHECK(report.classification == StabilityClass::kStable);
  }
  SUBCASE("radius exactly one is critical") {
    auto report = spectral_radius(two_by_two(2.0, 0.5));
    CHECK(report.spectral_radius == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.classification == StabilityClass::kCritical);
  }
  SUBCASE("unstable mutual pair") {
    auto report = spectral_radius(two_by_two(1.5, 1.5));
    CHECK(report.spectral_radius == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(report.classification == StabilityClass::kUnstable);
  }
  SUBCASE("dense positive matrix converges without the fallback") {
    auto rng = make_substream(3, 0);
    Eigen::MatrixXd m = testutil::random_dense_nonneg(rng, 10);
    auto report = spectral_radius(m);
    CHECK_FALSE(report.used_dense_fallback);
    CHECK(report.iterations > 0);
    CHECK(report.residual < 1e-8);
    CHECK(report.spectral_radius ==
          doctest::Approx(testutil::dense_spectral_radius(m)).epsilon(1e-9));
  }
  SUBCASE("iteration cap falls back to the dense solver") {
    auto rng = make_substream(3, 1);
    Eigen::MatrixXd m = testutil::random_dense_nonneg(rng, 10);
    auto report = spectral_radius(m, 1e-12, 2);
    CHECK(report.used_dense_fallback);
    CHECK(report.max_iter_exceeded);
    CHECK(report.spectral_radius ==
          doctest::Approx(testutil::dense_spectral_radius(m)).epsilon(1e-9));
  }
}

TEST_CASE("spectral radius agrees with the dense solver on random input") {
  auto rng = make_substream(5, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(uniform01(rng) * 14);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m(i, j) = (i == j || uniform01(rng) < 0.4) ? 0.0 : uniform01(rng);
    auto report = spectral_radius(m);
    CHECK(report.spectral_radius ==
          doctest::Approx(testutil::dense_spectral_radius(m))
              .epsilon(1e-9)
              .scale(1.0));
  }
}

TEST_CASE("spectral radius is invariant under relabeling the banks") {
  auto rng = make_substream(9, 0);
  Eigen::MatrixXd m = testutil::random_dense_nonneg(rng, 9);
  std::vector<int> perm{4, 0, 7, 2, 8, 1, 5, 3, 6};
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(9, 9);
  for (int i = 0; i < 9; ++i) p(perm[i], i) = 1.0;
  Eigen::MatrixXd relabeled = p.transpose() * m * p;
  CHECK(spectral_radius(relabeled).spectral_radius ==
        doctest::Approx(spectral_radius(m).spectral_radius).epsilon(1e-10));
}

TEST_CASE("linear fixed point of the stable dynamics") {
  SUBCASE("zero shock") {
    Eigen::VectorXd h = linear_fixed_point(two_by_two(0.5, 0.2),
                                           Eigen::VectorXd::Zero(2));
    CHECK(h.isZero(1e-15));
  }
  SUBCASE("two-bank fixture") {
    Eigen::VectorXd h1(2);
    h1 << 0.1, 0.025;
    Eigen::VectorXd h = linear_fixed_point(two_by_two(0.5, 0.2), h1);
    CHECK(h(0) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(h(1) == doctest::Approx(0.05).epsilon(1e-12));
  }
  SUBCASE("exact rationals on another shock") {
    Eigen::VectorXd h1(2);
    h1 << 0.1, 0.04;
    Eigen::VectorXd h = linear_fixed_point(two_by_two(0.5, 0.2), h1);
    CHECK(h(0) == doctest::Approx(2.0 / 15.0).epsilon(1e-12));
    CHECK(h(1) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
  }
  SUBCASE("singular matrix throws") {
    Eigen::VectorXd h1(2);
    h1 << 0.1, 0.1;
    CHECK_THROWS_AS(linear_fixed_point(two_by_two(1.0, 1.0), h1),
                    SingularSystemError);
  }
}

TEST_CASE("stable runs land on the linear fixed point") {
  auto rng = make_substream(13, 0);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto system = testutil::random_system_with_radius(rng, 8, 0.6);
    Eigen::VectorXd h1 = testutil::random_shock(rng, 8, 0.05);
    Eigen::VectorXd fp = linear_fixed_point(system.leverage().lambda, h1);
    if (fp.maxCoeff() >= 0.95) continue;  // keep to the unclipped regime
    auto result = run_contagion(system, h1);
    CHECK(result.converged);
    CHECK((result.h_final - fp).cwiseAbs().maxCoeff() < 1e-8);
    ++checked;
  }
  CHECK(checked >= 15);
}

TEST_CASE("stability after defaults uses the reduced matrix") {
  SUBCASE("full active set is the plain radius") {
    auto system = testutil::two_bank_fixture();
    std::vector<std::size_t> active{0, 1};
    auto report = stability_after_defaults(system, active);
    CHECK(report.spectral_radius ==
          doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
  }
  SUBCASE("an unstable pair is stable once one side is gone") {
    Eigen::VectorXd equity = Eigen::VectorXd::Ones(2);
    auto system = testutil::make_system(equity, two_by_two(1.5, 1.5));
    std::vector<std::size_t> active{1};
    auto report = stability_after_defaults(system, active);
    CHECK(report.spectral_radius == 0.0);
    CHECK(report.classification == StabilityClass::kStable);
  }
  SUBCASE("a ring above 1 breaks open when a bank drops out") {
    Eigen::VectorXd equity = Eigen::VectorXd::Ones(3);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    a(0, 1) = 1.2;
    a(1, 2) = 1.2;
    a(2, 0) = 1.2;
    auto system = testutil::make_system(equity, a);
    CHECK(stability_after_defaults(system, std::vector<std::size_t>{0, 1, 2})
              .spectral_radius == doctest::Approx(1.2).epsilon(1e-12));
    auto report =
        stability_after_defaults(system, std::vector<std::size_t>{1, 2});
    CHECK(report.spectral_radius == 0.0);
    CHECK(report.classification == StabilityClass::kStable);
  }
}

TEST_CASE("removing banks never raises the spectral radius") {
  auto rng = make_substream(17, 0);
  for (int trial = 0; trial < 10; ++trial) {
    auto system = testutil::random_sparse_system(rng, 10, 0.4);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < 10; ++i) active.push_back(i);
    double last = stability_after_defaults(system, active).spectral_radius;
    while (active.size() > 1) {
      active.pop_back();
      double next = stability_after_defaults(system, active).spectral_radius;
      CHECK(next <= last + 1e-10);
      last = next;
    }
  }
}
