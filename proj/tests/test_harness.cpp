#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gspse/dc_model.hpp"
#include "gspse/errors.hpp"
#include "gspse/experiment.hpp"
#include "test_util.hpp"

using namespace gspse;

namespace {

const ResultRecord& find(const std::vector<ResultRecord>& recs, Policy p, Estimator e, int q, double s2) {
  for (const ResultRecord& r : recs) {
    if (r.policy == p && r.estimator == e && r.q == q && r.sigma2 == s2) return r;
  }
  throw std::runtime_error("record not found");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("observability sweep endpoints") {
  const Network net = testutil::ieee("case14");
  ExperimentConfig cfg;
  cfg.case_name = "case14";
  cfg.q_values = {1, 14};
  cfg.trials = 200;
  const std::vector<ResultRecord> recs = run_observability_sweep(net, cfg);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].observable_fraction == 0.0);
  CHECK(recs[1].observable_fraction == 1.0);
  CHECK_FALSE(recs[0].estimator.has_value());
}

TEST_CASE("noiseless WLS on an observable selection is exact") {
  const Network net = testutil::ieee("case14");
  ExperimentConfig cfg;
  cfg.case_name = "case14";
  cfg.policies = {Policy::Random};
  cfg.estimators = {Estimator::Plain, Estimator::Gsp};
  cfg.q_values = {14};
  cfg.sigma2_values = {0.0};
  cfg.trials = 5;
  const std::vector<ResultRecord> recs = run_mse_experiment(net, cfg);
  const ResultRecord& wls = find(recs, Policy::Random, Estimator::Plain, 14, 0.0);
  REQUIRE(wls.mse_theta.has_value());
  CHECK(*wls.mse_theta < 1e-12);
  CHECK(*wls.mse_power < 1e-12);
  CHECK(wls.excluded_trials == 0);
  CHECK(wls.observable_fraction == 1.0);
}

TEST_CASE("empirical WLS MSE matches the covariance trace") {
  const Network net = testutil::ieee("case14");
  const LaplacianMatrix lap = build_laplacian(net);
  const double s2 = 0.01;
  ExperimentConfig cfg;
  cfg.case_name = "case14";
  cfg.policies = {Policy::Greedy};
  cfg.estimators = {Estimator::Plain};
  cfg.q_values = {14};
  cfg.sigma2_values = {s2};
  cfg.trials = 1000;
  const std::vector<ResultRecord> recs = run_mse_experiment(net, cfg);
  const DCMeasurementModel m = build_dc_model(lap, s2);
  const Matrix h = select(m.H, m.all_sensors(), m.state_columns());
  const double oracle = s2 * (h.transpose() * h).inverse().trace();
  REQUIRE(recs.front().mse_theta.has_value());
  CHECK(*recs.front().mse_theta == doctest::Approx(oracle).epsilon(0.10));
}

TEST_CASE("MSE trends on 57 buses") {
  const Network net = testutil::ieee("case57");
  ExperimentConfig cfg;
  cfg.case_name = "case57";
  cfg.policies = {Policy::Random};
  cfg.estimators = {Estimator::Gsp};
  cfg.trials = 200;
  SUBCASE("decreasing in 1/sigma2") {
    cfg.q_values = {20};
    cfg.sigma2_values = {1.0, 0.1, 0.01, 0.001};
    const std::vector<ResultRecord> recs = run_mse_experiment(net, cfg);
    REQUIRE(recs.size() == 4);
    for (std::size_t i = 1; i < recs.size(); ++i) CHECK(*recs[i].mse_theta < *recs[i - 1].mse_theta);
  }
  SUBCASE("non-increasing in q, one violation allowed") {
    cfg.q_values = {10, 20, 30, 40, 50, 57};
    const std::vector<ResultRecord> recs = run_mse_experiment(net, cfg);
    int violations = 0;
    for (std::size_t i = 1; i < recs.size(); ++i) violations += *recs[i].mse_theta > *recs[i - 1].mse_theta ? 1 : 0;
    CHECK(violations <= 1);
  }
}

TEST_CASE("reports are deterministic and thread-count independent") {
  const Network net = testutil::ieee("case14");
  ExperimentConfig cfg;
  cfg.case_name = "case14";
  cfg.q_values = {4, 8};
  cfg.sigma2_values = {0.1, 0.01};
  cfg.trials = 30;
  cfg.seed = 1234;
  cfg.edesign_cutoff = 6;
  const std::vector<ResultRecord> a = run_mse_experiment(net, cfg);
  cfg.threads = 3;
  const std::vector<ResultRecord> b = run_mse_experiment(net, cfg);
  CHECK(to_csv(a, false) == to_csv(b, false));
  cfg.seed = 1235;
  CHECK(to_csv(a, false) != to_csv(run_mse_experiment(net, cfg), false));
  // Row count is the product of the grid dimensions.
  CHECK(a.size() == 2u * 2u * 3u * 2u);

  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "gspse_test_report";
  std::filesystem::remove_all(dir);
  emit_report(a, dir, "first", false);
  emit_report(b, dir, "second", false);
  CHECK(slurp(dir / "first.csv") == slurp(dir / "second.csv"));
  const nlohmann::json doc = nlohmann::json::parse(slurp(dir / "first.json"));
  CHECK(doc.at("records").size() == a.size());
  std::filesystem::remove_all(dir);
}

TEST_CASE("CSV layout") {
  ResultRecord r;
  r.case_name = "case14";
  r.policy = Policy::Greedy;
  r.estimator = Estimator::Gsp;
  r.q = 5;
  r.sigma2 = 0.01;
  r.trials = 10;
  r.mse_theta = 0.25;
  r.observable_fraction = 0.5;
  r.runtime_ms = 12.5;
  const std::string csv = to_csv({r});
  CHECK(csv == csv_header() + "\ncase14,dc,greedy,gsp,5,0.01,10,0.25,,,0.5,0,12.5\n");
  CHECK(csv_header() ==
        "case,model,policy,estimator,q,sigma2,trials,mse_theta,mse_v,mse_power,observable_fraction,excluded_trials,"
        "runtime_ms");
  CHECK_THROWS_AS(emit_report({}, std::filesystem::temp_directory_path(), "x"), ConfigError);
}

TEST_CASE("configuration errors") {
  const Network net = testutil::ieee("case14");
  ExperimentConfig cfg;
  cfg.q_values = {15};
  CHECK_THROWS_AS(run_mse_experiment(net, cfg), ConfigError);
  cfg.q_values = {5};
  cfg.trials = 0;
  CHECK_THROWS_AS(run_observability_sweep(net, cfg), ConfigError);
  cfg.trials = 1;
  cfg.sigma2_values = {-1.0};
  CHECK_THROWS_AS(run_mse_experiment(net, cfg), ConfigError);
  CHECK(parse_policy("edesign") == Policy::EDesign);
  CHECK(parse_estimator("wls") == Estimator::Plain);
  CHECK(parse_model("ac") == ModelKind::AC);
  CHECK_THROWS_AS(parse_policy("best"), ConfigError);
}

TEST_CASE("AC experiment records magnitudes and exclusions") {
  const Network net = testutil::ieee("case14");
  ExperimentConfig cfg;
  cfg.case_name = "case14";
  cfg.model = ModelKind::AC;
  cfg.policies = {Policy::Random};
  cfg.estimators = {Estimator::Gsp, Estimator::Plain};
  cfg.q_values = {3, 14};
  cfg.trials = 5;
  const std::vector<ResultRecord> recs = run_mse_experiment(net, cfg);
  const ResultRecord& plain_few = find(recs, Policy::Random, Estimator::Plain, 3, 0.01);
  CHECK(plain_few.excluded_trials == 5);
  CHECK(plain_few.singular_trials == 5);
  CHECK_FALSE(plain_few.mse_theta.has_value());
  const ResultRecord& gsp_all = find(recs, Policy::Random, Estimator::Gsp, 14, 0.01);
  CHECK(gsp_all.mse_v.has_value());
  CHECK_FALSE(gsp_all.mse_power.has_value());
  CHECK(gsp_all.excluded_trials == 0);
}
