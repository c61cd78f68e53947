#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "gspse/errors.hpp"
#include "gspse/gauss_newton.hpp"
#include "test_util.hpp"

using namespace gspse;

namespace {

struct Fixture {
  Network net = testutil::ieee("case118");
  LaplacianMatrix lap = build_laplacian(net);
  ACMeasurementModel model{net, lap, 0.01};
  ACState truth = model.state_from_case(net);
  Vector h_true = model.measure(truth);
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

SensorSet all_rows(const ACMeasurementModel& m) {
  SensorSet s(static_cast<std::size_t>(m.measurements()));
  std::iota(s.begin(), s.end(), 0);
  return s;
}

IndexList random_buses(int n, int q, Rng& rng) {
  IndexList pool = all_indices(n);
  std::shuffle(pool.begin(), pool.end(), rng.engine());
  pool.resize(static_cast<std::size_t>(q));
  return pool;
}

}  // namespace

TEST_CASE("plain Gauss-Newton recovers the case solution from a flat start") {
  Fixture& f = fixture();
  const SensorSet s = all_rows(f.model);
  const GNResult r = gauss_newton_wls(f.model, f.h_true, s, GNConfig{});
  CHECK(r.trace.converged);
  CHECK(r.trace.iterations <= 20);
  CHECK((f.model.pack(r.state) - f.model.pack(f.truth)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(r.trace.step_norms.size() == static_cast<std::size_t>(r.trace.iterations));
}

TEST_CASE("starting at the answer stops immediately") {
  Fixture& f = fixture();
  GNConfig cfg;
  cfg.initial_state = f.truth;
  const GNResult r = gauss_newton_wls(f.model, f.h_true, all_rows(f.model), cfg);
  CHECK(r.trace.step_norms.front() < 1e-10);
  CHECK(r.trace.iterations == 1);
}

TEST_CASE("48 random buses leave the plain gain singular") {
  Fixture& f = fixture();
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    const SensorSet s = induced_ac_sensor_set(f.model, f.lap, random_buses(118, 48, rng));
    CHECK_THROWS_AS(gauss_newton_wls(f.model, select(f.h_true, s), s, GNConfig{}), SingularGain);
  }
}

TEST_CASE("zero regularization follows plain Gauss-Newton iterate by iterate") {
  Fixture& f = fixture();
  Rng rng(5);
  const SensorSet s = all_rows(f.model);
  const Vector z = f.h_true + 0.1 * rng.normal_vector(f.model.measurements());
  GNConfig cfg;
  cfg.mu_theta = 0.0;
  cfg.mu_v = 0.0;
  cfg.record_iterates = true;
  const GNResult plain = gauss_newton_wls(f.model, z, s, cfg);
  const GNResult reg = regularized_gauss_newton(f.model, z, s, f.lap, cfg);
  REQUIRE(plain.trace.iterates.size() == reg.trace.iterates.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < plain.trace.iterates.size(); ++i) {
    worst = std::max(worst, (plain.trace.iterates[i] - reg.trace.iterates[i]).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("pm variant with x0 and Lbar is the regularized solver") {
  Fixture& f = fixture();
  Rng rng(6);
  const SensorSet s = induced_ac_sensor_set(f.model, f.lap, random_buses(118, 48, rng));
  const Vector z = select(f.h_true, s) + 0.1 * rng.normal_vector(static_cast<Eigen::Index>(s.size()));
  GNConfig cfg;
  cfg.record_iterates = true;
  const GNResult reg = regularized_gauss_newton(f.model, z, s, f.lap, cfg);
  const GNResult pm = pm_gauss_newton(f.model, z, s, f.model.pack(f.model.anchor()),
                                      regularization_matrix(f.lap, cfg.mu_theta, cfg.mu_v), cfg);
  REQUIRE(reg.trace.iterates.size() == pm.trace.iterates.size());
  for (std::size_t i = 0; i < reg.trace.iterates.size(); ++i) {
    CHECK((reg.trace.iterates[i] - pm.trace.iterates[i]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("regularized solver at the anchor feels no regularization") {
  Fixture& f = fixture();
  Rng rng(7);
  const SensorSet s = induced_ac_sensor_set(f.model, f.lap, random_buses(118, 48, rng));
  const ACState x0 = f.model.anchor();
  GNConfig cfg;
  cfg.initial_state = x0;
  const GNResult r = regularized_gauss_newton(f.model, select(f.model.measure(x0), s), s, f.lap, cfg);
  CHECK(r.trace.converged);
  CHECK(r.trace.step_norms.front() < 1e-12);
  CHECK((f.model.pack(r.state) - f.model.pack(x0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pm variant without sensors returns the prior") {
  Fixture& f = fixture();
  Rng rng(8);
  const int k = f.model.state_size();
  const Vector prior = f.model.pack(f.model.anchor()) + 0.1 * rng.normal_vector(k);
  const GNResult r = pm_gauss_newton(f.model, Vector(), {}, prior, Matrix::Identity(k, k), GNConfig{});
  CHECK(r.trace.converged);
  CHECK((f.model.pack(r.state) - prior).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("regularized solver on 48 buses: convergence, optimality, descent") {
  Fixture& f = fixture();
  Rng rng(9);
  int converged = 0;
  int descending = 0;
  const int runs = 10;
  for (int t = 0; t < runs; ++t) {
    const SensorSet s = induced_ac_sensor_set(f.model, f.lap, random_buses(118, 48, rng));
    const Vector z = select(f.h_true, s) + 0.1 * rng.normal_vector(static_cast<Eigen::Index>(s.size()));
    const GNResult r = regularized_gauss_newton(f.model, z, s, f.lap, GNConfig{});
    converged += r.trace.converged ? 1 : 0;
    // First-order optimality.
    const ACState xs = r.state;
    const Matrix hw = select_rows(f.model.jacobian(xs), s) / 0.1;
    const double scale = (hw.transpose() * (z / 0.1)).norm();
    CHECK(r.trace.gradient_norm < 100.0 * 1e-8 * (1.0 + scale));
    bool mono = true;
    for (std::size_t i = 1; i < r.trace.objective.size(); ++i) {
      if (r.trace.objective[i] > r.trace.objective[i - 1] * (1.0 + 1e-12)) mono = false;
    }
    descending += mono ? 1 : 0;
    // The regularized gain is well conditioned even though the plain one is singular.
    for (double c : r.trace.condition) CHECK(std::isfinite(c));
  }
  CHECK(converged == runs);
  MESSAGE("objective non-increasing on " << descending << " of " << runs << " runs");
  CHECK(descending >= runs * 95 / 100);
}

TEST_CASE("regularized gain is positive definite when both weights are positive") {
  Fixture& f = fixture();
  const Matrix lbar = regularization_matrix(f.lap, 0.045, 10.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lbar);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
  CHECK_THROWS_AS(regularization_matrix(f.lap, -1.0, 1.0), ConfigError);
}

TEST_CASE("non-convergence carries the trace") {
  Fixture& f = fixture();
  GNConfig cfg;
  cfg.max_iterations = 1;
  try {
    gauss_newton_wls(f.model, f.h_true, all_rows(f.model), cfg);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.last_step_norm() > 1e-8);
  }
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(gauss_newton_wls(f.model, f.h_true, all_rows(f.model), cfg), ConfigError);
  cfg.max_iterations = 5;
  cfg.delta = 0.0;
  CHECK_THROWS_AS(gauss_newton_wls(f.model, f.h_true, all_rows(f.model), cfg), ConfigError);
}
