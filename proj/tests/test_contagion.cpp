#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "debtrank/contagion.hpp"
#include "debtrank/errors.hpp"
#include "debtrank/rng.hpp"
#include "support.hpp"

using namespace debtrank;

namespace {

// Three-bank lending chain: 0 lends to 1, 1 lends to 2. A shock at the end
// of the chain takes two propagation steps to reach the head.
dt::BankingSystem chain_fixture() {
  Eigen::VectorXd equity(3);
  equity << 1.0, 1.0, 1.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 0.5;
  a(1, 2) = 0.4;
  return testutil::make_system(equity, a);
}

// Two banks fully exposed to each other with leverage 1.5 each way; the
// spectral radius is 1.5, so small shocks amplify to default.
dt::BankingSystem mutual_unstable_fixture() {
  Eigen::VectorXd equity(2);
  equity << 1.0, 1.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 1) = 1.5;
  a(1, 0) = 1.5;
  return testutil::make_system(equity, a);
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("build_shock") {
  auto system = testutil::two_bank_fixture();

  SUBCASE("uniform zero") {
    CHECK(build_shock(ShockSpec::uniform(0.0), system).isZero(0.0));
  }
  SUBCASE("uniform devaluation scaled by external assets over equity") {
    Eigen::VectorXd h1 = build_shock(ShockSpec::uniform(0.01), system);
    CHECK(h1(0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(h1(1) == doctest::Approx(0.025).epsilon(1e-14));
  }
  SUBCASE("uniform shock clips at full loss") {
    Eigen::VectorXd h1 = build_shock(ShockSpec::uniform(0.2), system);
    CHECK(h1(0) == 1.0);  // 0.2 * 100 / 10 = 2, clipped
    CHECK(h1(1) == doctest::Approx(0.5));
  }
  SUBCASE("single-bank shock") {
    Eigen::VectorXd h1 = build_shock(ShockSpec::single(1, 0.01), system);
    CHECK(h1(0) == 0.0);
    CHECK(h1(1) == doctest::Approx(0.025));
  }
  SUBCASE("unknown bank index") {
    CHECK_THROWS_AS(build_shock(ShockSpec::single(5, 0.01), system),
                    UnknownBankError);
  }
  SUBCASE("alpha out of range") {
    CHECK_THROWS_AS(build_shock(ShockSpec::uniform(-0.1), system),
                    NegativeAlphaError);
    CHECK_THROWS_AS(build_shock(ShockSpec::uniform(1.5), system),
                    ValidationError);
  }
  SUBCASE("custom vector is clipped to [0, 1]") {
    Eigen::VectorXd h1 = build_shock(ShockSpec::custom(vec2(1.2, 0.3)), system);
    CHECK(h1(0) == 1.0);
    CHECK(h1(1) == doctest::Approx(0.3));
  }
  SUBCASE("custom vector of the wrong size") {
    CHECK_THROWS_AS(
        build_shock(ShockSpec::custom(Eigen::VectorXd::Zero(3)), system),
        DimensionMismatchError);
  }
  SUBCASE("negative custom entry rejected") {
    CHECK_THROWS_AS(build_shock(ShockSpec::custom(vec2(-0.1, 0.0)), system),
                    ValidationError);
  }
}

TEST_CASE("single propagation steps") {
  SUBCASE("zero increment is a fixed point") {
    auto system = testutil::two_bank_fixture();
    ContagionState s;
    s.t = 5;
    s.h = vec2(0.3, 0.2);
    s.h_prev = s.h;
    s.active_prev = {0, 1};
    auto next = step_generalized(s, system);
    CHECK(next.t == 6);
    CHECK((next.h - s.h).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("chain moves one hop per step") {
    auto system = chain_fixture();
    auto s1 = initial_state(vec3(0.0, 0.0, 0.1));
    CHECK(s1.t == 1);
    CHECK(s1.active_prev.size() == 3);
    auto s2 = step_generalized(s1, system);
    CHECK(s2.h(0) == doctest::Approx(0.0));
    CHECK(s2.h(1) == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(s2.h(2) == doctest::Approx(0.1));
    auto s3 = step_generalized(s2, system);
    CHECK(s3.h(0) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(s3.h(1) == doctest::Approx(0.04));
  }
  SUBCASE("losses clip at 1") {
    auto system = mutual_unstable_fixture();
    auto s = step_generalized(initial_state(vec2(0.9, 0.9)), system);
    CHECK(s.h(0) == 1.0);  // 0.9 + 1.5 * 0.9 clipped
    CHECK(s.h(1) == 1.0);
  }
}

TEST_CASE("defaulted banks propagate their final jump once, then freeze") {
  // Bank 0 is wiped out by the shock itself. The one-step information delay
  // means its loss still reaches bank 1 at t = 2; afterwards the defaulted
  // row and column are out of the matrix and nothing more happens.
  auto system = testutil::two_bank_fixture();
  auto result = run_contagion(system, vec2(1.0, 0.0));
  CHECK(result.h_final(0) == 1.0);
  CHECK(result.h_final(1) == doctest::Approx(0.2).epsilon(1e-14));
  REQUIRE(result.defaults.size() == 1);
  CHECK(result.defaults[0].bank == 0);
  CHECK(result.defaults[0].step == 1);
}

TEST_CASE("run_contagion on the two-bank fixture") {
  auto system = testutil::two_bank_fixture();

  SUBCASE("zero shock converges immediately") {
    auto result = run_contagion(system, Eigen::VectorXd::Zero(2));
    CHECK(result.converged);
    CHECK(result.steps_to_convergence == 1);
    CHECK(result.trajectory.size() == 2);
    CHECK(result.h_final.isZero(0.0));
    CHECK(result.defaults.empty());
  }
  SUBCASE("stable shock reaches the linear fixed point") {
    auto result = run_contagion(system, vec2(0.1, 0.025));
    CHECK(result.converged);
    CHECK(result.h_final(0) == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(result.h_final(1) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(result.defaults.empty());
    // trajectory bookkeeping
    CHECK(result.trajectory.front().isZero(0.0));
    CHECK((result.trajectory.back() - result.h_final).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(result.steps_to_convergence == result.trajectory.size() - 1);
    CHECK(result.aggregate_series.size() == result.trajectory.size());
    CHECK(result.aggregate_series[1] == doctest::Approx(0.05).epsilon(1e-12));
  }
  SUBCASE("trajectory is componentwise non-decreasing") {
    auto result = run_contagion(system, vec2(0.1, 0.025));
    for (std::size_t t = 1; t < result.trajectory.size(); ++t) {
      CHECK(((result.trajectory[t] - result.trajectory[t - 1]).array() >=
             -1e-15)
                .all());
    }
  }
  SUBCASE("max_steps cap reports non-convergence without throwing") {
    RunConfig config;
    config.max_steps = 2;
    auto result = run_contagion(system, vec2(0.1, 0.025), config);
    CHECK_FALSE(result.converged);
    CHECK(result.steps_to_convergence == 2);
    CHECK(result.trajectory.size() == 3);
  }
}

TEST_CASE("unstable system defaults from a small shock") {
  auto system = mutual_unstable_fixture();
  auto result = run_contagion(system, vec2(0.01, 0.01));
  CHECK(result.converged);
  CHECK(result.h_final(0) == 1.0);
  CHECK(result.h_final(1) == 1.0);
  CHECK(result.defaults.size() == 2);
}

TEST_CASE("default events record the step of first crossing") {
  auto system = mutual_unstable_fixture();
  auto result = run_contagion(system, vec2(0.9, 0.9));
  REQUIRE(result.defaults.size() == 2);
  CHECK(result.defaults[0].bank == 0);
  CHECK(result.defaults[0].step == 2);
  CHECK(result.defaults[1].bank == 1);
  CHECK(result.defaults[1].step == 2);
}

TEST_CASE("original comparator dynamics") {
  SUBCASE("zero shock") {
    auto system = testutil::two_bank_fixture();
    auto result = run_original_debtrank(system, Eigen::VectorXd::Zero(2));
    CHECK(result.converged);
    CHECK(result.h_final.isZero(0.0));
  }
  SUBCASE("each bank propagates exactly once") {
    auto system = testutil::two_bank_fixture();
    auto result = run_original_debtrank(system, vec2(0.1, 0.025));
    CHECK(result.converged);
    // one round of mutual propagation, then both banks go quiet
    CHECK(result.h_final(0) == doctest::Approx(0.1125).epsilon(1e-14));
    CHECK(result.h_final(1) == doctest::Approx(0.045).epsilon(1e-14));
  }
  SUBCASE("strictly below the generalized dynamics on a cycle") {
    auto system = testutil::two_bank_fixture();
    Eigen::VectorXd h1 = vec2(0.1, 0.025);
    auto original = run_original_debtrank(system, h1);
    auto generalized = run_contagion(system, h1);
    CHECK(original.h_final(0) < generalized.h_final(0));
    CHECK(original.h_final(1) < generalized.h_final(1));
  }
  SUBCASE("equal on a chain, where nothing can echo") {
    auto system = chain_fixture();
    Eigen::VectorXd h1 = vec3(0.0, 0.0, 0.1);
    auto original = run_original_debtrank(system, h1);
    auto generalized = run_contagion(system, h1);
    CHECK(original.h_final(0) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(original.h_final(1) == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(original.h_final(2) == doctest::Approx(0.1));
    CHECK((original.h_final - generalized.h_final).cwiseAbs().maxCoeff() <=
          1e-12);
  }
  SUBCASE("propagation weights are clipped at 1") {
    auto system = mutual_unstable_fixture();  // leverage 1.5, weight 1
    auto result = run_original_debtrank(system, vec2(0.4, 0.0));
    // bank 1 receives min(1, 1.5) * 0.4 = 0.4 and echoes it back once;
    // unclipped leverage would have defaulted bank 0 instead
    CHECK(result.h_final(0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(result.h_final(1) == doctest::Approx(0.4).epsilon(1e-14));
  }
  SUBCASE("mode dispatch through run_contagion") {
    auto system = testutil::two_bank_fixture();
    RunConfig config;
    config.mode = ContagionMode::kOriginalDebtRank;
    auto via_config = run_contagion(system, vec2(0.1, 0.025), config);
    CHECK(via_config.h_final(0) == doctest::Approx(0.1125).epsilon(1e-14));
  }
  SUBCASE("lower bound on random sparse systems") {
    auto rng = make_substream(23, 0);
    for (int trial = 0; trial < 25; ++trial) {
      auto system = testutil::random_sparse_system(rng, 10, 0.3);
      Eigen::VectorXd h1 = testutil::random_shock(rng, 10);
      auto original = run_original_debtrank(system, h1);
      auto generalized = run_contagion(system, h1);
      CHECK(((generalized.h_final - original.h_final).array() >= -1e-12)
                .all());
    }
  }
}

TEST_CASE("equity-space simulation") {
  SUBCASE("zero shock holds equity constant") {
    auto system = testutil::two_bank_fixture();
    auto series = simulate_equity(system, Eigen::VectorXd::Zero(2));
    CHECK(series.back()(0) == doctest::Approx(10.0));
    CHECK(series.back()(1) == doctest::Approx(20.0));
  }
  SUBCASE("fixture equities land on E0 * (1 - h_final)") {
    auto system = testutil::two_bank_fixture();
    auto series = simulate_equity(system, vec2(0.1, 0.025));
    CHECK(series.front()(0) == doctest::Approx(10.0));
    CHECK(series.back()(0) == doctest::Approx(8.75).epsilon(1e-10));
    CHECK(series.back()(1) == doctest::Approx(19.0).epsilon(1e-10));
  }
  SUBCASE("defaulted bank's equity clips at zero") {
    auto system = mutual_unstable_fixture();
    auto series = simulate_equity(system, vec2(0.9, 0.9));
    CHECK(series.back()(0) == 0.0);
    CHECK(series.back()(1) == 0.0);
  }
  SUBCASE("bank with no interbank assets only feels its own shock") {
    Eigen::VectorXd equity = Eigen::VectorXd::Ones(3);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    a(0, 1) = 0.5;  // bank 2 lends to nobody
    auto system = testutil::make_system(equity, a);
    auto series = simulate_equity(system, vec3(0.0, 0.2, 0.3));
    CHECK(series.back()(2) == doctest::Approx(0.7).epsilon(1e-12));
  }
  SUBCASE("matches the loss-space dynamics step for step") {
    auto rng = make_substream(31, 0);
    for (int trial = 0; trial < 10; ++trial) {
      auto system = testutil::random_sparse_system(rng, 8, 0.4);
      Eigen::VectorXd h1 = testutil::random_shock(rng, 8, 0.5);
      auto result = run_contagion(system, h1);
      auto series = simulate_equity(system, h1);
      REQUIRE(series.size() == result.trajectory.size());
      for (std::size_t t = 0; t < series.size(); ++t) {
        Eigen::VectorXd h_from_equity =
            (system.equity0() - series[t]).cwiseQuotient(system.equity0());
        CHECK((h_from_equity - result.trajectory[t]).cwiseAbs().maxCoeff() <
              1e-10);
      }
    }
  }
}
