#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gspse/laplacian.hpp"
#include "gspse/network.hpp"

namespace gspse {

enum class ModelKind { DC, AC };
enum class Policy { Random, EDesign, Greedy };
// DC: GSP-WLS, pm-WLS, classical WLS. AC: regularized GN, pm GN, plain GN.
enum class Estimator { Gsp, Pm, Plain };

std::string to_string(ModelKind m);
std::string to_string(Policy p);
std::string to_string(Estimator e);
ModelKind parse_model(const std::string& s);
Policy parse_policy(const std::string& s);
Estimator parse_estimator(const std::string& s);

struct ExperimentConfig {
  std::string case_name;
  ModelKind model = ModelKind::DC;
  std::vector<Policy> policies{Policy::Random, Policy::EDesign, Policy::Greedy};
  std::vector<Estimator> estimators{Estimator::Gsp, Estimator::Pm};
  std::vector<int> q_values{24, 36, 48, 60, 72, 84, 96, 108, 118};
  std::vector<double> sigma2_values{0.01};
  int trials = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  WeightConvention weights = WeightConvention::Susceptance;

  double mu = 0.1;          // DC smoothness weight, also used by the greedy CRB
  double mu_theta = 0.045;  // AC
  double mu_v = 10.0;
  double delta = 1e-8;
  int max_iterations = 20;
  int edesign_cutoff = 48;

  // pm baselines: prior drawn around zero angles (and x0 for AC) with this variance.
  double prior_variance = 0.015;
  double dc_prior_precision = 0.5;
  double ac_prior_precision = 1.0;
};

struct ResultRecord {
  std::string case_name;
  ModelKind model = ModelKind::DC;
  Policy policy = Policy::Random;
  std::optional<Estimator> estimator;  // empty for observability sweeps
  int q = 0;
  double sigma2 = 0.0;
  int trials = 0;
  std::optional<double> mse_theta;
  std::optional<double> mse_v;
  std::optional<double> mse_power;
  double observable_fraction = 0.0;
  int excluded_trials = 0;   // failed estimates, left out of the MSE
  int singular_trials = 0;   // of which: singular (regularized) gain or system
  double runtime_ms = 0.0;
};

// Fraction of uniformly random q-bus selections that are DC-observable, per q.
std::vector<ResultRecord> run_observability_sweep(const Network& net, const ExperimentConfig& config);

// Empirical MSE over trials for every (sigma2, q, policy, estimator).
std::vector<ResultRecord> run_mse_experiment(const Network& net, const ExperimentConfig& config);

std::string csv_header();
std::string to_csv(const std::vector<ResultRecord>& records, bool include_runtime = true);
nlohmann::json to_json(const std::vector<ResultRecord>& records, bool include_runtime = true);

// Writes <dir>/<stem>.csv and <dir>/<stem>.json. With include_runtime = false the
// runtime column is left empty so reruns are byte-identical.
void emit_report(const std::vector<ResultRecord>& records, const std::filesystem::path& dir,
                 const std::string& stem, bool include_runtime = true);

}  // namespace gspse
