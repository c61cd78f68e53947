#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gspse/dc_model.hpp"
#include "gspse/errors.hpp"
#include "test_util.hpp"

using namespace gspse;
using testutil::data_path;

namespace {

LaplacianMatrix chain() { return build_laplacian(load_case(data_path("toy/three_bus_chain.json"))); }

// Null-space form: the only angle vectors invisible to the sensors are constants.
bool nullspace_is_constant(const DCMeasurementModel& model, const SensorSet& sensors) {
  const int n = model.buses();
  if (sensors.empty()) return n == 1;
  const Matrix h = select_rows(model.H, sensors);
  Eigen::FullPivLU<Matrix> lu(h);
  lu.setThreshold(1e-10);
  const Matrix kernel = lu.kernel();
  if (kernel.cols() != 1) return false;
  const Vector k = kernel.col(0) / kernel.col(0).norm();
  return (k.cwiseAbs() - Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)))).cwiseAbs().maxCoeff() < 1e-8;
}

}  // namespace

TEST_CASE("3-bus chain model by hand") {
  const DCMeasurementModel m = build_dc_model(chain(), 0.5);
  REQUIRE(m.measurements() == 7);
  REQUIRE(m.buses() == 3);
  Matrix expected(7, 3);
  expected << 10, -10, 0,  //
      -10, 15, -5,         //
      0, -5, 5,            //
      10, -10, 0,          //
      -10, 10, 0,          //
      0, 5, -5,            //
      0, -5, 5;
  CHECK((m.H - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((m.H * Vector::Ones(3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.sensors[3].kind == SensorKind::BranchFlow);
  CHECK(m.sensors[3].from == 0);
  CHECK(m.sensors[4].from == 1);
  CHECK(m.R.dense().isApprox(0.5 * Matrix::Identity(7, 7)));
  CHECK_THROWS_AS(build_dc_model(chain(), -1.0), ConfigError);
}

TEST_CASE("118-bus model has 476 rows") {
  const DCMeasurementModel m = build_dc_model(build_laplacian(testutil::ieee("case118")), 0.01);
  CHECK(m.measurements() == 476);
  CHECK((m.H * Vector::Ones(118)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("induced sensor sets") {
  const LaplacianMatrix lap = chain();
  CHECK(induced_sensor_set(lap, {0}) == SensorSet{0, 3, 4});
  CHECK(induced_sensor_set(lap, {1}) == SensorSet{1, 3, 4, 5, 6});
  // Both endpoints selected: each flow appears once.
  CHECK(induced_sensor_set(lap, {1, 0}) == SensorSet{0, 1, 3, 4, 5, 6});
  CHECK_THROWS_AS(induced_sensor_set(lap, {3}), DimensionMismatch);
}

TEST_CASE("measurement generation") {
  const LaplacianMatrix lap = chain();
  DCState truth{Vector(3)};
  truth.theta << 0.0, -0.05, -0.12;
  SUBCASE("noiseless") {
    const DCMeasurementModel m = build_dc_model(lap, 0.0);
    Rng rng(1);
    CHECK((generate_dc_measurements(m, truth, rng) - m.H * truth.theta).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("seeded repeat") {
    const DCMeasurementModel m = build_dc_model(lap, 0.3);
    Rng a(42), b(42);
    CHECK(generate_dc_measurements(m, truth, a) == generate_dc_measurements(m, truth, b));
  }
  SUBCASE("noise covariance") {
    const double s2 = 0.3;
    const DCMeasurementModel m = build_dc_model(lap, s2);
    Rng rng(9);
    const int draws = 100000;
    Matrix acc = Matrix::Zero(7, 7);
    const Vector mean = m.H * truth.theta;
    for (int i = 0; i < draws; ++i) {
      const Vector e = generate_dc_measurements(m, truth, rng) - mean;
      acc.selfadjointView<Eigen::Lower>().rankUpdate(e);
    }
    const Matrix cov = Matrix(acc.selfadjointView<Eigen::Lower>()) / draws;
    for (int i = 0; i < 7; ++i) CHECK(cov(i, i) == doctest::Approx(s2).epsilon(0.05));
    CHECK((cov - Matrix(cov.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 0.05 * s2);
  }
  SUBCASE("full covariance") {
    Matrix r(7, 7);
    r.setIdentity();
    r(0, 3) = r(3, 0) = 0.4;
    const DCMeasurementModel m = with_noise(build_dc_model(lap, 1.0), NoiseCovariance::full(r));
    Rng rng(4);
    double c03 = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      const Vector e = generate_dc_measurements(m, truth, rng) - m.H * truth.theta;
      c03 += e(0) * e(3);
    }
    CHECK(c03 / draws == doctest::Approx(0.4).epsilon(0.05));
  }
}

TEST_CASE("observability") {
  const LaplacianMatrix lap = chain();
  const DCMeasurementModel m = build_dc_model(lap, 1.0);
  CHECK(is_observable(m, m.all_sensors()));
  CHECK_FALSE(is_observable(m, {}));
  CHECK(is_observable(m, {0, 1, 2}));
  CHECK(is_observable(m, {3, 5}));
  CHECK_FALSE(is_observable(m, {3, 4}));
  // Bus 3 untouched: no injection there and no flow on (2,3).
  CHECK_FALSE(is_observable(m, induced_sensor_set(lap, {0})));
  CHECK_THROWS_AS(is_observable(m, {99}), DimensionMismatch);
}

TEST_CASE("rank test agrees with the null-space test") {
  Rng rng(21);
  int agree = 0;
  int observable = 0;
  const int pairs = 200;
  for (int trial = 0; trial < pairs; ++trial) {
    std::uniform_int_distribution<int> size(3, 10);
    const LaplacianMatrix lap = testutil::random_graph(size(rng.engine()), rng, 2);
    const DCMeasurementModel m = build_dc_model(lap, 1.0);
    SensorSet s;
    std::bernoulli_distribution keep(0.25);
    for (int r = 0; r < m.measurements(); ++r) {
      if (keep(rng.engine())) s.push_back(r);
    }
    const bool rank_test = is_observable(m, s);
    observable += rank_test ? 1 : 0;
    agree += rank_test == nullspace_is_constant(m, s) ? 1 : 0;
  }
  CHECK(agree == pairs);
  // Both outcomes must be exercised.
  CHECK(observable > 10);
  CHECK(observable < pairs - 10);
}

TEST_CASE("WLS estimates") {
  const LaplacianMatrix lap = chain();
  DCState truth{Vector(3)};
  truth.theta << 0.0, -0.05, -0.12;
  const DCMeasurementModel m = build_dc_model(lap, 0.01);
  const Vector z = m.H * truth.theta;
  SUBCASE("full sensors, noiseless") {
    const DCState est = wls_estimate(m, z, m.all_sensors());
    CHECK((est.theta - truth.theta).norm() < 1e-12);
    CHECK(est.theta(0) == 0.0);
  }
  SUBCASE("injections only") {
    const SensorSet s{0, 1, 2};
    CHECK((wls_estimate(m, select(z, s), s).theta - truth.theta).norm() < 1e-12);
  }
  SUBCASE("unobservable") {
    const SensorSet s = induced_sensor_set(lap, {0});
    CHECK_THROWS_AS(wls_estimate(m, select(z, s), s), Unobservable);
  }
  SUBCASE("matches the dense normal-equation formula") {
    const Network net = testutil::ieee("case14");
    const LaplacianMatrix l14 = build_laplacian(net);
    const DCMeasurementModel m14 = build_dc_model(l14, 0.04);
    const SensorSet s = induced_sensor_set(l14, {0, 3, 5, 7, 8, 12});
    Rng rng(3);
    const DCState t14{case_signals(net).theta};
    const Vector zs = select(generate_dc_measurements(m14, t14, rng), s);
    const IndexList cols = m14.state_columns();
    const Matrix h = select(m14.H, s, cols);
    const Vector dense = (h.transpose() * h / 0.04).inverse() * (h.transpose() * zs / 0.04);
    const DCState est = wls_estimate(m14, zs, s);
    CHECK((select(est.theta, cols) - dense).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("WLS is unbiased") {
  const Network net = testutil::ieee("case14");
  const LaplacianMatrix lap = build_laplacian(net);
  const DCMeasurementModel m = build_dc_model(lap, 0.01);
  const DCState truth{case_signals(net).theta};
  const SensorSet s = induced_sensor_set(lap, {0, 3, 5, 7, 8, 12});
  REQUIRE(is_observable(m, s));
  Rng rng(17);
  const int draws = 1000;
  const int n = m.buses();
  Vector sum = Vector::Zero(n);
  Vector sum2 = Vector::Zero(n);
  for (int i = 0; i < draws; ++i) {
    const Vector z = generate_dc_measurements(m, truth, rng);
    const Vector est = wls_estimate(m, select(z, s), s).theta;
    sum += est;
    sum2 += est.cwiseAbs2();
  }
  const Vector mean = sum / draws;
  const Vector var = sum2 / draws - mean.cwiseAbs2();
  for (int k = 0; k < n; ++k) {
    if (k == m.reference) continue;
    const double se = std::sqrt(var(k) / draws);
    CHECK(std::abs(mean(k) - truth.theta(k)) < 3.0 * se + 1e-15);
  }
}

TEST_CASE("random 48-bus selections on 118 buses are unobservable") {
  const LaplacianMatrix lap = build_laplacian(testutil::ieee("case118"));
  const DCMeasurementModel m = build_dc_model(lap, 1.0);
  Rng rng(8);
  int observable = 0;
  for (int t = 0; t < 1000; ++t) {
    IndexList pool = all_indices(118);
    std::shuffle(pool.begin(), pool.end(), rng.engine());
    pool.resize(48);
    observable += is_observable(m, induced_sensor_set(lap, pool)) ? 1 : 0;
  }
  CHECK(observable == 0);
}

TEST_CASE("measurement replay round-trip") {
  const LaplacianMatrix lap = chain();
  const DCMeasurementModel m = build_dc_model(lap, 1.0);
  const SensorSet s{0, 4, 6};
  Vector z(3);
  z << 0.5, -0.25, 1e-17;
  const nlohmann::json doc = measurements_to_json(m, s, z);
  Vector back;
  CHECK(measurements_from_json(m, nlohmann::json::parse(doc.dump()), back) == s);
  CHECK(back == z);
  nlohmann::json bad = doc;
  bad["sensors"][1]["from"] = 3;
  CHECK_THROWS_AS(measurements_from_json(m, bad, back), ConfigError);
}
